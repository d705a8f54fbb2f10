#pragma once

#include "fedsim/dataset.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/partition.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedsim {

enum class Strategy { fedavg, fedprox, fedpdc, fedpdc_adaptive };

/// How the accuracy penalty lambda * (1 - p) enters local training.
///   literal   : added to the loss as a constant; gradients are plain CE.
///   scaled_ce : loss is (1 + lambda * (1 - p)) * CE, so it rescales gradients.
enum class PenaltyMode { literal, scaled_ce };

std::string_view to_string(Strategy s);
std::string_view to_string(PenaltyMode m);
std::optional<Strategy> parse_strategy(std::string_view s);
std::optional<PenaltyMode> parse_penalty_mode(std::string_view s);

struct StrategyConfig {
    Strategy strategy = Strategy::fedavg;
    double lambda = 10.0;
    double mu_prox = 0.01;
    PenaltyMode penalty_mode = PenaltyMode::literal;
    double tau = 1.0;

    bool is_fedpdc() const noexcept {
        return strategy == Strategy::fedpdc || strategy == Strategy::fedpdc_adaptive;
    }
    void validate() const;

    friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

struct TrainConfig {
    std::size_t local_epochs = 10;
    std::size_t batch_size = 64;
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 1e-5;
    std::size_t rounds = 50;
    std::uint64_t seed = 0;

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// lambda = 0.5 * n for the n-th communication round (n >= 1).
double adaptive_lambda(std::size_t round);

/// Strategy with lambda resolved for a 1-based round (only fedpdc_adaptive changes).
StrategyConfig resolve_round_strategy(const StrategyConfig& strategy, std::size_t round);

/// max(floor(tau * N), 1) distinct clients, ascending. The draw depends only on
/// (seed, round).
std::vector<std::size_t> sample_clients(std::size_t num_clients, double tau, std::size_t round,
                                        std::uint64_t seed);

/// Loss value plus how to assemble its gradient:
///   grad = ce_scale * grad(CE) + prox_coeff * (w - w_global)
struct LocalLoss {
    double value = 0.0;
    double cross_entropy = 0.0;
    double ce_scale = 1.0;
    double prox_coeff = 0.0;
};

LocalLoss local_loss(double cross_entropy, const StrategyConfig& strategy, double p,
                     std::span<const double> w, std::span<const double> w_global);
LocalLoss local_loss(const Matrix& logits, std::span<const int> labels, const StrategyConfig& strategy,
                     double p, std::span<const double> w, std::span<const double> w_global);

struct ClientState {
    std::size_t id = 0;
    LabeledDataset data;
};

struct LocalResult {
    ParamVector model;
    /// Reported local_loss value of every minibatch step, in order.
    std::vector<double> batch_losses;
    /// Plain cross-entropy of every minibatch step.
    std::vector<double> batch_cross_entropy;

    double mean_loss() const;
};

/// Minibatch SGD from w_global for train.local_epochs epochs with a fresh
/// per-epoch shuffle keyed by (seed, round, client id, epoch).
LocalResult local_train(const ClientState& client, const ParamVector& w_global, double p,
                        const TrainConfig& train, const StrategyConfig& strategy, std::size_t round);

struct AggregationResult {
    ParamVector model;
    std::vector<double> weights;
    bool uniform_fallback = false;
};

std::vector<double> fedavg_weights(std::span<const std::size_t> sizes);
/// p_i / sum(p); uniform when the sum is zero (sets `fallback`).
std::vector<double> fedpdc_weights(std::span<const double> accuracies, bool* fallback = nullptr);
ParamVector weighted_average(std::span<const ParamVector> models, std::span<const double> weights);

AggregationResult aggregate_fedavg(std::span<const ParamVector> models, std::span<const std::size_t> sizes);
AggregationResult aggregate_fedpdc(std::span<const ParamVector> models, std::span<const double> accuracies);

struct ServerState {
    ParamVector global;
    std::optional<ServerSet> server_set;
    std::size_t round = 0;
    /// Last S_s accuracy scored by each client's local model.
    std::vector<double> ledger;
    /// Round (1-based) in which each client was last selected; 0 = never.
    std::vector<std::size_t> last_selected;
    double global_acc_server = 0.0;

    static ServerState start(ParamVector initial, std::optional<ServerSet> server_set, std::size_t num_clients);
};

/// Global objective value and gradient at one point.
struct ObjectiveProbe {
    double loss = 0.0;
    double grad_norm_sq = 0.0;
};

struct RoundRecord {
    std::size_t round = 0;
    std::vector<std::size_t> selected;
    std::vector<double> sent_accuracy;
    /// Accuracy of each returned local model on S_s (empty without a server set).
    std::vector<double> scored_accuracy;
    std::vector<double> weights;
    double lambda = 0.0;
    double mean_local_loss = 0.0;
    double global_acc_server = 0.0;
    std::optional<double> global_acc_test;
    std::vector<std::string> flags;

    std::optional<ObjectiveProbe> objective_before;
    std::optional<ObjectiveProbe> objective_after;
    std::optional<double> gradient_dissimilarity;
    /// P / p_k for each selected client (infinity when p_k = 0).
    std::vector<double> accuracy_dissimilarity;
};

struct RoundOptions {
    const LabeledDataset* test_set = nullptr;
    bool instrument_global_loss = false;
    bool emit_dissimilarity = false;
    std::size_t threads = 1;
};

/// One synchronous round: sample, train locals, score on S_s, aggregate.
RoundRecord run_round(ServerState& server, std::span<const ClientState> clients, const StrategyConfig& strategy,
                      const TrainConfig& train, const RoundOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn);

} // namespace fedsim
