#include "fedsim/dataset.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fedsim {

LabeledDataset::LabeledDataset(Matrix features, std::vector<int> labels, int num_classes)
    : samples_{std::move(features), std::move(labels)}, num_classes_(num_classes) {
    if (num_classes_ < 1)
        throw DataError("dataset needs at least one class");
    if (samples_.labels.empty())
        throw DataError("dataset is empty");
    if (samples_.features.rows() != samples_.labels.size())
        throw ShapeError("dataset has " + std::to_string(samples_.features.rows()) +
                         " feature rows but " + std::to_string(samples_.labels.size()) + " labels");
    for (std::size_t i = 0; i < samples_.labels.size(); ++i) {
        const int y = samples_.labels[i];
        if (y < 0 || y >= num_classes_)
            throw DataError("label " + std::to_string(y) + " at sample " + std::to_string(i) +
                            " outside [0, " + std::to_string(num_classes_) + ")");
    }
    for (double v : samples_.features.data())
        if (!std::isfinite(v))
            throw DataError("dataset contains a non-finite feature value");
}

Batch LabeledDataset::batch(std::span<const std::size_t> indices) const {
    Batch out{samples_.features.gather_rows(indices), {}};
    out.labels.reserve(indices.size());
    for (auto i : indices)
        out.labels.push_back(samples_.labels[i]);
    return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
    auto b = batch(indices);
    return LabeledDataset(std::move(b.features), std::move(b.labels), num_classes_);
}

std::vector<std::size_t> LabeledDataset::class_histogram() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
    for (int y : samples_.labels)
        ++counts[static_cast<std::size_t>(y)];
    return counts;
}

std::vector<std::vector<std::size_t>> LabeledDataset::indices_by_class() const {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_classes_));
    for (std::size_t i = 0; i < samples_.labels.size(); ++i)
        out[static_cast<std::size_t>(samples_.labels[i])].push_back(i);
    return out;
}

namespace {

void validate(const SyntheticSpec& spec) {
    if (spec.num_classes < 1 || spec.samples_per_class < 1 || spec.input_dim < 1)
        throw ConfigError("synthetic spec needs num_classes, samples_per_class and input_dim >= 1");
    if (!(spec.cluster_spread >= 0.0) || !std::isfinite(spec.cluster_spread))
        throw ConfigError("synthetic cluster_spread must be a finite nonnegative number");
}

LabeledDataset sample_clusters(const SyntheticSpec& spec, const Matrix& means, std::size_t per_class,
                               std::uint64_t stream) {
    const auto classes = static_cast<std::size_t>(spec.num_classes);
    Rng rng(mix_seed({spec.seed, stream}));
    Matrix features(classes * per_class, spec.input_dim);
    std::vector<int> labels(classes * per_class);
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t s = 0; s < per_class; ++s) {
            const std::size_t r = c * per_class + s;
            labels[r] = static_cast<int>(c);
            for (std::size_t j = 0; j < spec.input_dim; ++j)
                features(r, j) = means(c, j) + spec.cluster_spread * rng.normal();
        }
    }
    return LabeledDataset(std::move(features), std::move(labels), spec.num_classes);
}

} // namespace

Matrix synthetic_class_means(const SyntheticSpec& spec) {
    validate(spec);
    constexpr double radius = 2.0;
    Rng rng(mix_seed({spec.seed, 0}));
    Matrix means(static_cast<std::size_t>(spec.num_classes), spec.input_dim);
    for (std::size_t c = 0; c < means.rows(); ++c) {
        double norm = 0.0;
        while (norm < 1e-12) {
            norm = 0.0;
            for (auto& v : means.row(c)) {
                v = rng.normal();
                norm += v * v;
            }
            norm = std::sqrt(norm);
        }
        for (auto& v : means.row(c))
            v *= radius / norm;
    }
    return means;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
    return sample_clusters(spec, synthetic_class_means(spec), spec.samples_per_class, 1);
}

LabeledDataset generate_synthetic_holdout(const SyntheticSpec& spec, std::size_t per_class) {
    if (per_class < 1)
        throw ConfigError("holdout needs at least one sample per class");
    return sample_clusters(spec, synthetic_class_means(spec), per_class, 2);
}

LabeledDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open dataset " + path.string());

    std::vector<long long> raw_labels;
    std::vector<double> values;
    std::size_t width = 0;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto trimmed = trim(line);
        if (trimmed.empty())
            continue;
        const auto cells = split(trimmed, ',');
        if (cells.size() < 2)
            throw DataError(path.string() + ": row " + std::to_string(row) +
                            " needs a label and at least one feature");
        if (width == 0)
            width = cells.size();
        else if (cells.size() != width)
            throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " + std::to_string(width));
        const auto label = parse_int(cells[0]);
        if (!label)
            throw DataError(path.string() + ": row " + std::to_string(row) + " label '" +
                            std::string(trim(cells[0])) + "' is not an integer");
        raw_labels.push_back(*label);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            const auto v = parse_double(cells[c]);
            if (!v || !std::isfinite(*v))
                throw DataError(path.string() + ": row " + std::to_string(row) + " column " +
                                std::to_string(c + 1) + " value '" + std::string(trim(cells[c])) +
                                "' is not a finite number");
            values.push_back(*v);
        }
    }
    if (raw_labels.empty())
        throw DataError(path.string() + ": empty dataset file");

    std::map<long long, int> dense;
    for (auto l : raw_labels)
        dense.emplace(l, 0);
    int next = 0;
    for (auto& [raw, mapped] : dense)
        mapped = next++;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (auto l : raw_labels)
        labels.push_back(dense.at(l));

    Matrix features(raw_labels.size(), width - 1, std::move(values));
    return LabeledDataset(std::move(features), std::move(labels), next);
}

void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write dataset " + path.string());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        out << dataset.labels()[i];
        for (double v : dataset.features().row(i))
            out << ',' << format_double(v);
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

} // namespace fedsim
