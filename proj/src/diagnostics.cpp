#include "fedsim/diagnostics.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/text.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace fedsim {

DissimilarityReport dissimilarity_B(double global_acc, std::span<const double> client_accs) {
    DissimilarityReport r;
    for (double p : client_accs) {
        if (p == 0.0) {
            r.per_client.push_back(std::numeric_limits<double>::infinity());
            r.infinite.push_back(true);
        } else {
            r.per_client.push_back(global_acc / p);
            r.infinite.push_back(false);
        }
        r.max_b = std::max(r.max_b, r.per_client.back());
    }
    return r;
}

GlobalObjective global_objective(const ParamVector& w, std::span<const LabeledDataset* const> datasets) {
    if (datasets.empty())
        throw DiagnosticsError("global objective needs at least one client dataset");
    double total = 0.0;
    for (const auto* d : datasets)
        total += static_cast<double>(d->size());
    GlobalObjective out;
    out.gradient.assign(w.size(), 0.0);
    for (const auto* d : datasets) {
        const double weight = static_cast<double>(d->size()) / total;
        auto lg = loss_and_gradient(w, d->samples());
        out.loss += weight * lg.loss;
        for (std::size_t i = 0; i < w.size(); ++i)
            out.gradient[i] += weight * lg.gradient[i];
        out.client_weights.push_back(weight);
        out.client_gradients.push_back(std::move(lg.gradient));
    }
    return out;
}

GlobalObjective global_objective(const ParamVector& w, std::span<const ClientState> clients) {
    std::vector<const LabeledDataset*> datasets;
    datasets.reserve(clients.size());
    for (const auto& c : clients)
        datasets.push_back(&c.data);
    return global_objective(w, datasets);
}

GradientDissimilarity gradient_dissimilarity(const std::vector<std::vector<double>>& client_gradients,
                                             std::span<const double> weights) {
    if (client_gradients.empty() || client_gradients.size() != weights.size())
        throw DiagnosticsError("gradient dissimilarity needs one weight per client gradient");
    const auto dim = client_gradients.front().size();
    std::vector<double> mean(dim, 0.0);
    double mean_sq_norm = 0.0;
    for (std::size_t k = 0; k < client_gradients.size(); ++k) {
        const auto& g = client_gradients[k];
        if (g.size() != dim)
            throw DiagnosticsError("client gradients differ in length");
        double sq = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            mean[i] += weights[k] * g[i];
            sq += g[i] * g[i];
        }
        mean_sq_norm += weights[k] * sq;
    }
    double global_sq = 0.0;
    for (double v : mean)
        global_sq += v * v;
    GradientDissimilarity out;
    out.global_grad_norm = std::sqrt(global_sq);
    if (out.global_grad_norm > gradient_norm_floor)
        out.value = std::sqrt(mean_sq_norm) / out.global_grad_norm;
    return out;
}

GradientDissimilarity gradient_dissimilarity(const ParamVector& w, std::span<const LabeledDataset* const> datasets) {
    const auto obj = global_objective(w, datasets);
    return gradient_dissimilarity(obj.client_gradients, obj.client_weights);
}

DescentRecord make_descent_record(std::size_t round, double loss_before, double loss_after, double grad_norm_sq) {
    if (!(grad_norm_sq >= 0.0))
        throw DiagnosticsError("squared gradient norm must be nonnegative");
    DescentRecord r{round, loss_before, loss_after, grad_norm_sq, 0.0};
    if (grad_norm_sq > 0.0)
        r.implied_rate = (loss_before - loss_after) / grad_norm_sq;
    return r;
}

DescentSummary summarize_descent(std::vector<DescentRecord> records) {
    DescentSummary s;
    s.rounds = std::move(records);
    if (s.rounds.empty())
        return s;
    std::size_t positive = 0;
    double total = 0.0;
    for (const auto& r : s.rounds) {
        total += r.implied_rate;
        if (r.implied_rate > 0.0)
            ++positive;
        else
            s.violations.push_back(r.round);
    }
    const auto n = static_cast<double>(s.rounds.size());
    s.fraction_positive = static_cast<double>(positive) / n;
    s.mean_rate = total / n;
    return s;
}

DescentSummary descent_check(std::span<const RoundRecord> history) {
    std::vector<DescentRecord> records;
    records.reserve(history.size());
    for (const auto& r : history) {
        if (!r.objective_before || !r.objective_after)
            throw DiagnosticsError("round " + std::to_string(r.round) +
                                   " has no global-loss instrumentation; enable instrument_global_loss");
        records.push_back(make_descent_record(r.round, r.objective_before->loss, r.objective_after->loss,
                                              r.objective_before->grad_norm_sq));
    }
    return summarize_descent(std::move(records));
}

TheoremValue theorem_constant(const TheoremConstants& c) {
    const double mb = c.mu_bar();
    if (!(mb > 0.0))
        throw DiagnosticsError("mu_bar = mu - L_minus must be positive");
    if (!(c.mu > 0.0) || !(c.K > 0.0))
        throw DiagnosticsError("mu and K must be positive");
    const double L = c.L;
    const double B = c.B;
    const double K = c.K;
    const double lambda = 1.0 / c.mu - L * B / (mb * c.mu) - L * B * B / (2.0 * mb * mb) -
                          2.0 * L * B * B / (K * mb * mb) +
                          (1.0 + 2.0 * L * B / mb) * std::sqrt(2.0) * B / (mb * std::sqrt(K));
    return {lambda, lambda > 0.0};
}

std::size_t RoundHistory::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw DataError("round history has no column '" + std::string(name) + "'");
}

std::vector<double> RoundHistory::numeric_column(std::string_view name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto v = parse_double(rows[r][c]);
        if (!v)
            throw DataError("round history line " + std::to_string(r + 2) + ": column '" + std::string(name) +
                            "' value '" + rows[r][c] + "' is not numeric");
        out.push_back(*v);
    }
    return out;
}

RoundHistory parse_round_csv(std::string_view text, const std::string& source) {
    RoundHistory h;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        for (auto cell : split(line, ','))
            cells.emplace_back(cell);
        if (h.header.empty()) {
            h.header = std::move(cells);
            continue;
        }
        if (cells.size() != h.header.size())
            throw DataError(source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                            " fields, header has " + std::to_string(h.header.size()));
        h.rows.push_back(std::move(cells));
    }
    if (h.header.empty())
        throw DataError(source + ": empty round history");
    return h;
}

RoundHistory read_round_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open round history " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_round_csv(ss.str(), path.string());
}

std::optional<std::size_t> rounds_to_target(std::span<const double> accuracy_by_round, double target) {
    for (std::size_t i = 0; i < accuracy_by_round.size(); ++i)
        if (accuracy_by_round[i] >= target)
            return i + 1;
    return std::nullopt;
}

std::optional<std::size_t> rounds_to_target(const RoundHistory& history, double target) {
    const auto acc = history.numeric_column("global_acc_test");
    const auto rounds = history.numeric_column("round");
    for (std::size_t i = 0; i < acc.size(); ++i)
        if (acc[i] >= target)
            return static_cast<std::size_t>(rounds[i]);
    return std::nullopt;
}

std::optional<double> speedup(std::optional<std::size_t> baseline_rounds, std::optional<std::size_t> candidate_rounds) {
    if (!baseline_rounds || !candidate_rounds || *candidate_rounds == 0)
        return std::nullopt;
    return static_cast<double>(*baseline_rounds) / static_cast<double>(*candidate_rounds);
}

std::string format_speedup(std::optional<double> ratio) {
    if (!ratio)
        return "<1×";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *ratio);
    std::string s = buf;
    if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0)
        s.resize(s.size() - 2);
    return s + "×";
}

} // namespace fedsim
