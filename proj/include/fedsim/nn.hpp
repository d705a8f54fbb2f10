#pragma once

#include "fedsim/dataset.hpp"
#include "fedsim/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fedsim {

/// Fully connected network: widths = {input, hidden..., classes}. Hidden
/// layers use ReLU; the output layer emits raw logits.
struct ModelArch {
    std::vector<std::size_t> layer_widths;

    std::size_t input_dim() const { return layer_widths.front(); }
    std::size_t num_classes() const { return layer_widths.back(); }
    std::size_t num_layers() const { return layer_widths.size() - 1; }
    std::size_t param_count() const;

    /// Throws ConfigError unless there are >= 2 widths, all >= 1.
    void validate() const;
    std::string to_string() const;  // "a,b,c"

    friend bool operator==(const ModelArch&, const ModelArch&) = default;
};

/// Flat parameters: per layer, the (in x out) row-major weight matrix followed
/// by the out-length bias vector.
struct ParamVector {
    ModelArch arch;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

/// Offsets of layer l's weights and biases inside ParamVector::values.
struct LayerSlice {
    std::size_t in;
    std::size_t out;
    std::size_t weight_offset;
    std::size_t bias_offset;
};
std::vector<LayerSlice> layer_slices(const ModelArch& arch);

/// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.
ParamVector init_model(const ModelArch& arch, std::uint64_t seed);

Matrix forward(const ParamVector& model, const Matrix& features);
inline Matrix forward(const ParamVector& model, const Batch& batch) { return forward(model, batch.features); }

/// Mean softmax cross-entropy, stabilized by max subtraction.
double cross_entropy(const Matrix& logits, std::span<const int> labels);

/// Row-wise softmax.
Matrix softmax(const Matrix& logits);

struct LossAndGradient {
    double loss;
    std::vector<double> gradient;
};

/// Mean cross-entropy and its exact gradient in one pass.
LossAndGradient loss_and_gradient(const ParamVector& model, const Batch& batch);
std::vector<double> backward(const ParamVector& model, const Batch& batch);

inline constexpr double default_fd_step = 1e-3;

/// Central differences of an arbitrary scalar function.
std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& loss,
                                     std::span<const double> point, double step = default_fd_step);
/// Central differences of the mean cross-entropy of `model` on `batch`.
std::vector<double> finite_diff_grad(const ParamVector& model, const Batch& batch,
                                     double step = default_fd_step);

struct OptimizerState {
    std::vector<double> momentum_buffer;
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-5;

    static OptimizerState for_model(const ParamVector& model, double lr, double momentum,
                                    double weight_decay);
};

/// buffer <- momentum * buffer + grad + weight_decay * w;  w <- w - lr * buffer.
void sgd_step(ParamVector& model, std::span<const double> gradient, OptimizerState& opt);

/// Fraction of rows whose argmax logit (lowest index on ties) equals the label.
double evaluate_accuracy(const ParamVector& model, const LabeledDataset& dataset);
double evaluate_accuracy(const ParamVector& model, const Batch& batch);

/// Index of the largest value; the first one wins ties.
std::size_t argmax(std::span<const double> values);

/// `fedsim-model v1; arch=a,b,c\n` then little-endian IEEE-754 doubles.
void save_checkpoint(const ParamVector& model, const std::filesystem::path& path);
ParamVector load_checkpoint(const std::filesystem::path& path);

} // namespace fedsim
