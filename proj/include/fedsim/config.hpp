#pragma once

#include "fedsim/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fedsim {

enum class DatasetSource { synthetic, csv };

/// Everything one experiment needs. Defaults follow the usual desk-scale setup:
/// SGD lr 0.01, momentum 0.9, weight decay 1e-5, batch 64, 10 local epochs,
/// 10 clients.
struct ExperimentConfig {
    DatasetSource dataset = DatasetSource::synthetic;
    std::string data_path;
    std::string test_path;

    int num_classes = 8;
    std::size_t samples_per_class = 200;
    std::size_t input_dim = 16;
    double cluster_spread = 0.6;
    std::size_t test_per_class = 100;

    std::vector<std::size_t> hidden = {32};

    std::size_t clients = 10;
    double beta = 0.5;
    std::size_t per_class = 32;

    StrategyConfig strategy;
    TrainConfig train;

    std::vector<std::uint64_t> seeds;
    std::string output_dir = "runs/default";

    bool instrument_global_loss = false;
    bool emit_dissimilarity = false;
    std::size_t threads = 1;

    /// Enforces every field constraint; throws ConfigError naming the key.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// `key = value` lines; `#` starts a comment. Unknown or repeated keys, bad
/// values, and constraint violations throw ConfigError naming key and line.
ExperimentConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Fully resolved config in the same `key = value` format; reparses to an equal config.
std::string render_config(const ExperimentConfig& config);

/// Recognised keys, in rendering order.
const std::vector<std::string>& config_keys();

} // namespace fedsim
