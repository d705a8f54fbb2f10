#include "fedsim/nn.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/text.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

namespace fedsim {

std::size_t ModelArch::param_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l)
        n += layer_widths[l] * layer_widths[l + 1] + layer_widths[l + 1];
    return n;
}

void ModelArch::validate() const {
    if (layer_widths.size() < 2)
        throw ConfigError("model architecture needs at least an input and an output width");
    for (auto w : layer_widths)
        if (w < 1)
            throw ConfigError("model architecture has a zero-width layer: " + to_string());
}

std::string ModelArch::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < layer_widths.size(); ++i) {
        if (i)
            out += ',';
        out += std::to_string(layer_widths[i]);
    }
    return out;
}

std::vector<LayerSlice> layer_slices(const ModelArch& arch) {
    std::vector<LayerSlice> out;
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_widths.size(); ++l) {
        const auto in = arch.layer_widths[l];
        const auto o = arch.layer_widths[l + 1];
        out.push_back({in, o, offset, offset + in * o});
        offset += in * o + o;
    }
    return out;
}

ParamVector init_model(const ModelArch& arch, std::uint64_t seed) {
    arch.validate();
    ParamVector model{arch, std::vector<double>(arch.param_count(), 0.0)};
    Rng rng(mix_seed({seed, 0x1417}));
    for (const auto& s : layer_slices(arch)) {
        const double bound = std::sqrt(6.0 / static_cast<double>(s.in + s.out));
        for (std::size_t i = 0; i < s.in * s.out; ++i)
            model.values[s.weight_offset + i] = rng.uniform(-bound, bound);
    }
    return model;
}

namespace {

void check_model(const ParamVector& model, std::size_t input_dim) {
    if (model.values.size() != model.arch.param_count())
        throw ShapeError("parameter vector has " + std::to_string(model.values.size()) +
                         " values, architecture " + model.arch.to_string() + " needs " +
                         std::to_string(model.arch.param_count()));
    if (input_dim != model.arch.input_dim())
        throw ShapeError("input has " + std::to_string(input_dim) + " features, model expects " +
                         std::to_string(model.arch.input_dim()));
}

// Pre-activations of every layer; the last entry holds the logits.
std::vector<Matrix> forward_layers(const ParamVector& model, const Matrix& features) {
    check_model(model, features.cols());
    const auto slices = layer_slices(model.arch);
    std::vector<Matrix> pre;
    pre.reserve(slices.size());
    const Matrix* input = &features;
    Matrix activated;
    for (std::size_t l = 0; l < slices.size(); ++l) {
        const auto& s = slices[l];
        const double* w = model.values.data() + s.weight_offset;
        const double* b = model.values.data() + s.bias_offset;
        Matrix z(input->rows(), s.out);
        for (std::size_t r = 0; r < input->rows(); ++r) {
            auto zr = z.row(r);
            std::copy(b, b + s.out, zr.begin());
            const auto xr = input->row(r);
            for (std::size_t i = 0; i < s.in; ++i) {
                const double xi = xr[i];
                if (xi == 0.0)
                    continue;
                const double* wi = w + i * s.out;
                for (std::size_t j = 0; j < s.out; ++j)
                    zr[j] += xi * wi[j];
            }
        }
        pre.push_back(std::move(z));
        if (l + 1 < slices.size()) {
            activated = pre.back();
            for (auto& v : activated.data())
                v = std::max(v, 0.0);
            input = &activated;
        }
    }
    return pre;
}

void check_labels(std::span<const int> labels, std::size_t rows, std::size_t classes) {
    if (labels.size() != rows)
        throw ShapeError("batch has " + std::to_string(rows) + " rows but " + std::to_string(labels.size()) +
                         " labels");
    if (rows == 0)
        throw ShapeError("batch is empty");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
            throw DataError("label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                            " outside [0, " + std::to_string(classes) + ")");
}

} // namespace

Matrix forward(const ParamVector& model, const Matrix& features) {
    auto pre = forward_layers(model, features);
    return std::move(pre.back());
}

Matrix softmax(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto in = logits.row(r);
        auto o = out.row(r);
        const double top = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) {
            o[j] = std::exp(in[j] - top);
            total += o[j];
        }
        for (auto& v : o)
            v /= total;
    }
    return out;
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
    check_labels(labels, logits.rows(), logits.cols());
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows(); ++r) {
        const auto row = logits.row(r);
        const double top = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double v : row)
            sum += std::exp(v - top);
        total += std::log(sum) + top - row[static_cast<std::size_t>(labels[r])];
    }
    return total / static_cast<double>(logits.rows());
}

LossAndGradient loss_and_gradient(const ParamVector& model, const Batch& batch) {
    const auto pre = forward_layers(model, batch.features);
    const Matrix& logits = pre.back();
    const double loss = cross_entropy(logits, batch.labels);
    const auto slices = layer_slices(model.arch);
    const auto rows = batch.size();
    const double inv_n = 1.0 / static_cast<double>(rows);

    // d loss / d logits = (softmax - onehot) / n
    Matrix delta = softmax(logits);
    for (std::size_t r = 0; r < rows; ++r) {
        delta(r, static_cast<std::size_t>(batch.labels[r])) -= 1.0;
        for (auto& v : delta.row(r))
            v *= inv_n;
    }

    std::vector<double> grad(model.values.size(), 0.0);
    for (std::size_t l = slices.size(); l-- > 0;) {
        const auto& s = slices[l];
        double* gw = grad.data() + s.weight_offset;
        double* gb = grad.data() + s.bias_offset;
        for (std::size_t r = 0; r < rows; ++r) {
            const auto d = delta.row(r);
            for (std::size_t j = 0; j < s.out; ++j)
                gb[j] += d[j];
            for (std::size_t i = 0; i < s.in; ++i) {
                const double a = l == 0 ? batch.features(r, i) : std::max(pre[l - 1](r, i), 0.0);
                if (a == 0.0)
                    continue;
                double* gwi = gw + i * s.out;
                for (std::size_t j = 0; j < s.out; ++j)
                    gwi[j] += a * d[j];
            }
        }
        if (l == 0)
            break;
        const double* w = model.values.data() + s.weight_offset;
        Matrix prev(rows, s.in);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto d = delta.row(r);
            for (std::size_t i = 0; i < s.in; ++i) {
                if (pre[l - 1](r, i) <= 0.0)
                    continue;
                const double* wi = w + i * s.out;
                double acc = 0.0;
                for (std::size_t j = 0; j < s.out; ++j)
                    acc += wi[j] * d[j];
                prev(r, i) = acc;
            }
        }
        delta = std::move(prev);
    }
    return {loss, std::move(grad)};
}

std::vector<double> backward(const ParamVector& model, const Batch& batch) {
    return loss_and_gradient(model, batch).gradient;
}

std::vector<double> finite_diff_grad(const std::function<double(std::span<const double>)>& loss,
                                     std::span<const double> point, double step) {
    if (!(step > 0.0) || !std::isfinite(step))
        throw ConfigError("finite-difference step must be positive");
    std::vector<double> x(point.begin(), point.end());
    std::vector<double> grad(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + step;
        const double up = loss(x);
        x[i] = orig - step;
        const double down = loss(x);
        x[i] = orig;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

std::vector<double> finite_diff_grad(const ParamVector& model, const Batch& batch, double step) {
    check_model(model, batch.features.cols());
    ParamVector probe = model;
    return finite_diff_grad(
        [&](std::span<const double> w) {
            std::copy(w.begin(), w.end(), probe.values.begin());
            return cross_entropy(forward(probe, batch.features), batch.labels);
        },
        model.values, step);
}

OptimizerState OptimizerState::for_model(const ParamVector& model, double lr, double momentum,
                                         double weight_decay) {
    if (!(lr >= 0.0))
        throw ConfigError("learning rate must be nonnegative");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0))
        throw ConfigError("weight decay must be nonnegative");
    return OptimizerState{std::vector<double>(model.values.size(), 0.0), lr, momentum, weight_decay};
}

void sgd_step(ParamVector& model, std::span<const double> gradient, OptimizerState& opt) {
    if (gradient.size() != model.values.size() || opt.momentum_buffer.size() != model.values.size())
        throw ShapeError("sgd_step: model has " + std::to_string(model.values.size()) + " values, gradient " +
                         std::to_string(gradient.size()) + ", momentum buffer " +
                         std::to_string(opt.momentum_buffer.size()));
    for (std::size_t i = 0; i < model.values.size(); ++i) {
        double& buf = opt.momentum_buffer[i];
        buf = opt.momentum * buf + gradient[i] + opt.weight_decay * model.values[i];
        model.values[i] -= opt.lr * buf;
    }
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < values.size(); ++j)
        if (values[j] > values[best])
            best = j;
    return best;
}

double evaluate_accuracy(const ParamVector& model, const Batch& batch) {
    if (batch.size() == 0)
        throw EvaluationError("cannot evaluate accuracy on an empty dataset");
    const Matrix logits = forward(model, batch.features);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < logits.rows(); ++r)
        if (argmax(logits.row(r)) == static_cast<std::size_t>(batch.labels[r]))
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(batch.size());
}

double evaluate_accuracy(const ParamVector& model, const LabeledDataset& dataset) {
    return evaluate_accuracy(model, dataset.samples());
}

namespace {

constexpr std::string_view checkpoint_magic = "fedsim-model v1; arch=";

std::uint64_t to_little_endian(std::uint64_t bits) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t out = 0;
        for (int i = 0; i < 8; ++i)
            out |= ((bits >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return out;
    }
    return bits;
}

} // namespace

void save_checkpoint(const ParamVector& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write checkpoint " + path.string());
    out << checkpoint_magic << model.arch.to_string() << '\n';
    for (double v : model.values) {
        const auto bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
        char bytes[8];
        std::memcpy(bytes, &bits, 8);
        out.write(bytes, 8);
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

ParamVector load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint " + path.string());
    std::string header;
    std::getline(in, header);
    if (header.rfind(checkpoint_magic, 0) != 0)
        throw DataError(path.string() + ": not a fedsim-model v1 checkpoint");
    ModelArch arch;
    for (auto cell : split(std::string_view(header).substr(checkpoint_magic.size()), ',')) {
        const auto w = parse_int(cell);
        if (!w || *w < 1)
            throw DataError(path.string() + ": bad architecture in header '" + header + "'");
        arch.layer_widths.push_back(static_cast<std::size_t>(*w));
    }
    arch.validate();
    ParamVector model{arch, std::vector<double>(arch.param_count())};
    for (auto& v : model.values) {
        char bytes[8];
        if (!in.read(bytes, 8))
            throw DataError(path.string() + ": checkpoint truncated");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, 8);
        v = std::bit_cast<double>(to_little_endian(bits));
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw DataError(path.string() + ": trailing bytes after parameters");
    return model;
}

} // namespace fedsim
