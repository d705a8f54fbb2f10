#pragma once

#include "fedsim/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace fedsim {

/// Features (batch_size x input_dim) with integer class labels.
struct Batch {
    Matrix features;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

/// A nonempty labeled dataset. Labels lie in [0, num_classes).
class LabeledDataset {
public:
    LabeledDataset(Matrix features, std::vector<int> labels, int num_classes);

    std::size_t size() const noexcept { return samples_.labels.size(); }
    std::size_t input_dim() const noexcept { return samples_.features.cols(); }
    int num_classes() const noexcept { return num_classes_; }

    const Matrix& features() const noexcept { return samples_.features; }
    std::span<const int> labels() const noexcept { return samples_.labels; }
    /// Whole dataset as a single batch.
    const Batch& samples() const noexcept { return samples_; }

    Batch batch(std::span<const std::size_t> indices) const;
    LabeledDataset subset(std::span<const std::size_t> indices) const;

    /// Number of samples of each class, length num_classes.
    std::vector<std::size_t> class_histogram() const;
    /// Sample indices of each class in ascending order.
    std::vector<std::vector<std::size_t>> indices_by_class() const;

private:
    Batch samples_;
    int num_classes_;
};

struct SyntheticSpec {
    int num_classes = 2;
    std::size_t samples_per_class = 50;
    std::size_t input_dim = 2;
    double cluster_spread = 0.1;
    std::uint64_t seed = 0;
};

/// Gaussian class clusters. Class means are seeded random directions on the unit
/// sphere scaled to radius 2; samples are mean + N(0, spread^2) per coordinate.
/// Output is grouped by class: class 0 first, then class 1, ...
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

/// Same class means as generate_synthetic(spec) with an independent noise stream;
/// used as a held-out test set for a synthetic training pool.
LabeledDataset generate_synthetic_holdout(const SyntheticSpec& spec, std::size_t per_class);

/// Class mean vectors used by generate_synthetic (num_classes x input_dim).
Matrix synthetic_class_means(const SyntheticSpec& spec);

/// Reads `label,f1,f2,...` rows. Labels are remapped to a dense [0, C) range in
/// ascending order of their original value.
LabeledDataset load_csv(const std::filesystem::path& path);

/// Writes `label,f1,...` rows with 17 significant digits.
void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path);

} // namespace fedsim
