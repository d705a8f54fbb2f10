#pragma once

#include "fedsim/config.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/partition.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fedsim {

/// Data, split, and initial model for one seed. Everything is a pure function
/// of the config, so strategies sharing a seed share all of it.
struct Simulation {
    LabeledDataset pool;
    std::optional<LabeledDataset> test_set;
    ServerSplit split;
    Partition partition;
    std::vector<ClientState> clients;
    ModelArch arch;
    ParamVector initial;
};

Simulation prepare_simulation(const ExperimentConfig& config);

struct RunResult {
    std::filesystem::path dir;
    std::vector<RoundRecord> records;
    ParamVector final_model;
    double initial_acc_server = 0.0;
    std::optional<double> initial_acc_test;
};

inline constexpr const char* round_csv_header =
    "round,selected,mean_local_loss,global_acc_server,global_acc_test,agg_weights,flags";

std::string format_round_row(const RoundRecord& record);

/// Runs every round and writes, under config.output_dir:
///   rounds.csv, model.bin, partition.txt, server_set.txt, config.resolved,
///   manifest.json, and diagnostics.csv when instrumentation is on.
RunResult run_experiment(const ExperimentConfig& config);

/// Same as run_experiment without touching the filesystem.
RunResult simulate(const ExperimentConfig& config);

struct SweepResult {
    std::vector<RunResult> runs;
    std::vector<std::uint64_t> seeds;
    std::filesystem::path summary_path;
    double mean_final_acc_test = 0.0;
    double std_final_acc_test = 0.0;
};

/// One run per seed into output_dir/seed_<s>, then output_dir/sweep_summary.csv
/// with per-seed final accuracies plus mean and sample standard deviation.
SweepResult run_sweep(const ExperimentConfig& config);

/// Long-format rows `round,run,strategy,metric,value` from each run's rounds.csv.
void write_plot_data(const std::vector<std::filesystem::path>& run_dirs, std::ostream& out);

struct CompareRow {
    std::string run;
    std::string strategy;
    std::optional<std::size_t> rounds;
    std::optional<double> speedup;
};

/// Rounds each run needs to reach `target` (default: the first run's final
/// test accuracy), with speedup relative to the first run.
std::vector<CompareRow> compare_runs(const std::vector<std::filesystem::path>& run_dirs,
                                     std::optional<double> target, double* resolved_target = nullptr);
std::string format_compare_table(const std::vector<CompareRow>& rows, double target);

/// Mean and sample (n - 1) standard deviation; NaN deviation for one value.
std::pair<double, double> mean_and_sample_std(const std::vector<double>& values);

} // namespace fedsim
