#pragma once

#include "fedsim/engine.hpp"
#include "fedsim/nn.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fedsim {

/// Accuracy-based local dissimilarity B_k = P / p_k.
struct DissimilarityReport {
    std::size_t round = 0;
    std::vector<double> per_client;  // +inf where p_k == 0
    std::vector<bool> infinite;
    double max_b = 0.0;
    std::optional<double> gradient_ratio;
};

DissimilarityReport dissimilarity_B(double global_acc, std::span<const double> client_accs);

/// Size-weighted objective over the union of client data: value, gradient, and
/// each client's full-batch gradient. Clients are reduced in the given order.
struct GlobalObjective {
    double loss = 0.0;
    std::vector<double> gradient;
    std::vector<std::vector<double>> client_gradients;
    std::vector<double> client_weights;
};

GlobalObjective global_objective(const ParamVector& w, std::span<const LabeledDataset* const> datasets);
GlobalObjective global_objective(const ParamVector& w, std::span<const ClientState> clients);

inline constexpr double gradient_norm_floor = 1e-12;

struct GradientDissimilarity {
    /// sqrt(E_k ||grad F_k||^2) / ||grad f||; empty when ||grad f|| <= floor.
    std::optional<double> value;
    double global_grad_norm = 0.0;
};

/// Gradient ratio from per-client gradients and their (size) weights.
GradientDissimilarity gradient_dissimilarity(const std::vector<std::vector<double>>& client_gradients,
                                             std::span<const double> weights);
GradientDissimilarity gradient_dissimilarity(const ParamVector& w, std::span<const LabeledDataset* const> datasets);

struct DescentRecord {
    std::size_t round = 0;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double grad_norm_sq = 0.0;
    /// (f(w^t) - f(w^{t+1})) / ||grad f(w^t)||^2; 0 when the gradient vanishes.
    double implied_rate = 0.0;
};

struct DescentSummary {
    std::vector<DescentRecord> rounds;
    double fraction_positive = 0.0;
    double mean_rate = 0.0;
    std::vector<std::size_t> violations;  // rounds with implied_rate <= 0
};

DescentRecord make_descent_record(std::size_t round, double loss_before, double loss_after, double grad_norm_sq);
/// Requires objective_before/after on every record.
DescentSummary descent_check(std::span<const RoundRecord> history);
DescentSummary summarize_descent(std::vector<DescentRecord> records);

struct TheoremConstants {
    double L = 1.0;        // smoothness
    double L_minus = 0.0;  // lower curvature bound
    double mu = 1.0;
    double B = 1.0;
    double K = 1.0;

    double mu_bar() const noexcept { return mu - L_minus; }
};

struct TheoremValue {
    double lambda = 0.0;
    bool applicable = false;  // lambda > 0
};

/// Expected-descent constant of the non-convex convergence bound:
///   1/mu - L B/(mu_bar mu) - L B^2/(2 mu_bar^2) - 2 L B^2/(K mu_bar^2)
///     + (1 + 2 L B/mu_bar) sqrt(2) B/(mu_bar sqrt(K))
TheoremValue theorem_constant(const TheoremConstants& c);

/// Rows of a round CSV used by the comparison tools.
struct RoundHistory {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const;
    std::vector<double> numeric_column(std::string_view name) const;
};

RoundHistory read_round_csv(const std::filesystem::path& path);
RoundHistory parse_round_csv(std::string_view text, const std::string& source = "<memory>");

/// First round whose test accuracy reaches target.
std::optional<std::size_t> rounds_to_target(const RoundHistory& history, double target);
std::optional<std::size_t> rounds_to_target(std::span<const double> accuracy_by_round, double target);

/// baseline_rounds / candidate_rounds; empty when the candidate never reached the target.
std::optional<double> speedup(std::optional<std::size_t> baseline_rounds, std::optional<std::size_t> candidate_rounds);
/// "4x", "1.8x", or "<1x" when absent.
std::string format_speedup(std::optional<double> ratio);

} // namespace fedsim
