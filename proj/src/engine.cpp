#include "fedsim/engine.hpp"

#include "fedsim/diagnostics.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace fedsim {

std::string_view to_string(Strategy s) {
    switch (s) {
    case Strategy::fedavg: return "fedavg";
    case Strategy::fedprox: return "fedprox";
    case Strategy::fedpdc: return "fedpdc";
    case Strategy::fedpdc_adaptive: return "fedpdc_adaptive";
    }
    return "?";
}

std::string_view to_string(PenaltyMode m) {
    return m == PenaltyMode::literal ? "literal" : "scaled_ce";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
    for (auto v : {Strategy::fedavg, Strategy::fedprox, Strategy::fedpdc, Strategy::fedpdc_adaptive})
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::optional<PenaltyMode> parse_penalty_mode(std::string_view s) {
    for (auto v : {PenaltyMode::literal, PenaltyMode::scaled_ce})
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

void StrategyConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0))
        throw ConfigError("tau must lie in (0, 1]");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw ConfigError("lambda must be a finite nonnegative number");
    if (!(mu_prox >= 0.0) || !std::isfinite(mu_prox))
        throw ConfigError("mu_prox must be a finite nonnegative number");
}

void TrainConfig::validate() const {
    if (batch_size < 1)
        throw ConfigError("batch_size must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr))
        throw ConfigError("lr must be a finite nonnegative number");
    if (!(momentum >= 0.0 && momentum < 1.0))
        throw ConfigError("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
        throw ConfigError("weight_decay must be a finite nonnegative number");
}

double adaptive_lambda(std::size_t round) {
    if (round < 1)
        throw ConfigError("adaptive lambda is defined for rounds n >= 1");
    return 0.5 * static_cast<double>(round);
}

StrategyConfig resolve_round_strategy(const StrategyConfig& strategy, std::size_t round) {
    StrategyConfig out = strategy;
    if (strategy.strategy == Strategy::fedpdc_adaptive)
        out.lambda = adaptive_lambda(round);
    return out;
}

std::vector<std::size_t> sample_clients(std::size_t num_clients, double tau, std::size_t round,
                                        std::uint64_t seed) {
    if (num_clients < 1)
        throw ConfigError("need at least one client");
    if (!(tau > 0.0 && tau <= 1.0))
        throw ConfigError("tau must lie in (0, 1]");
    // The epsilon absorbs products like 0.29 * 100 = 28.999999999999996.
    const auto wanted = static_cast<std::size_t>(std::floor(tau * static_cast<double>(num_clients) + 1e-9));
    const std::size_t m = std::clamp<std::size_t>(wanted, 1, num_clients);
    std::vector<std::size_t> ids(num_clients);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    if (m < num_clients) {
        Rng rng(mix_seed({seed, round, 0x5a3b1e}));
        for (std::size_t i = 0; i < m; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.below(num_clients - i));
            std::swap(ids[i], ids[j]);
        }
        ids.resize(m);
        std::sort(ids.begin(), ids.end());
    }
    return ids;
}

LocalLoss local_loss(double cross_entropy, const StrategyConfig& strategy, double p,
                     std::span<const double> w, std::span<const double> w_global) {
    if (!(p >= 0.0 && p <= 1.0))
        throw StateError("client accuracy p = " + std::to_string(p) + " outside [0, 1]");
    LocalLoss out;
    out.cross_entropy = cross_entropy;
    out.value = cross_entropy;
    switch (strategy.strategy) {
    case Strategy::fedavg:
        break;
    case Strategy::fedprox: {
        if (w.size() != w_global.size())
            throw ShapeError("proximal term needs equal-length local and global models");
        double sq = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double d = w[i] - w_global[i];
            sq += d * d;
        }
        out.value += 0.5 * strategy.mu_prox * sq;
        out.prox_coeff = strategy.mu_prox;
        break;
    }
    case Strategy::fedpdc:
    case Strategy::fedpdc_adaptive: {
        const double penalty = strategy.lambda * (1.0 - p);
        if (strategy.penalty_mode == PenaltyMode::literal) {
            out.value = cross_entropy + penalty;
        } else {
            out.ce_scale = 1.0 + penalty;
            out.value = out.ce_scale * cross_entropy;
        }
        break;
    }
    }
    return out;
}

LocalLoss local_loss(const Matrix& logits, std::span<const int> labels, const StrategyConfig& strategy,
                     double p, std::span<const double> w, std::span<const double> w_global) {
    return local_loss(fedsim::cross_entropy(logits, labels), strategy, p, w, w_global);
}

double LocalResult::mean_loss() const {
    if (batch_losses.empty())
        return std::nan("");
    double total = 0.0;
    for (double v : batch_losses)
        total += v;
    return total / static_cast<double>(batch_losses.size());
}

LocalResult local_train(const ClientState& client, const ParamVector& w_global, double p,
                        const TrainConfig& train, const StrategyConfig& strategy, std::size_t round) {
    train.validate();
    if (!(p >= 0.0 && p <= 1.0))
        throw StateError("client " + std::to_string(client.id) + " received accuracy " + std::to_string(p) +
                         " outside [0, 1]");
    LocalResult result{w_global, {}, {}};
    ParamVector& w = result.model;
    auto opt = OptimizerState::for_model(w, train.lr, train.momentum, train.weight_decay);

    const std::size_t n = client.data.size();
    std::vector<std::size_t> order(n);
    std::vector<double> grad(w.size());
    for (std::size_t epoch = 0; epoch < train.local_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(mix_seed({train.seed, round, client.id, epoch, 0xe90c}));
        rng.shuffle(std::span(order));
        for (std::size_t start = 0; start < n; start += train.batch_size) {
            const auto count = std::min(train.batch_size, n - start);
            const Batch batch = client.data.batch(std::span(order).subspan(start, count));
            auto lg = loss_and_gradient(w, batch);
            const auto loss = local_loss(lg.loss, strategy, p, w.values, w_global.values);
            if (!std::isfinite(loss.value))
                throw DivergenceError("client " + std::to_string(client.id) + " diverged in round " +
                                      std::to_string(round) + " (non-finite local loss)");
            for (std::size_t i = 0; i < grad.size(); ++i) {
                grad[i] = loss.ce_scale * lg.gradient[i];
                if (loss.prox_coeff != 0.0)
                    grad[i] += loss.prox_coeff * (w.values[i] - w_global.values[i]);
            }
            sgd_step(w, grad, opt);
            result.batch_losses.push_back(loss.value);
            result.batch_cross_entropy.push_back(loss.cross_entropy);
        }
    }
    for (double v : w.values)
        if (!std::isfinite(v))
            throw DivergenceError("client " + std::to_string(client.id) + " produced non-finite parameters in round " +
                                  std::to_string(round));
    return result;
}

std::vector<double> fedavg_weights(std::span<const std::size_t> sizes) {
    if (sizes.empty())
        throw AggregationError("nothing to aggregate");
    double total = 0.0;
    for (auto s : sizes)
        total += static_cast<double>(s);
    if (total <= 0.0)
        throw AggregationError("total client data size is zero");
    std::vector<double> weights;
    weights.reserve(sizes.size());
    for (auto s : sizes)
        weights.push_back(static_cast<double>(s) / total);
    return weights;
}

std::vector<double> fedpdc_weights(std::span<const double> accuracies, bool* fallback) {
    if (accuracies.empty())
        throw AggregationError("nothing to aggregate");
    double total = 0.0;
    for (double p : accuracies) {
        if (!(p >= 0.0 && p <= 1.0))
            throw AggregationError("accuracy " + std::to_string(p) + " outside [0, 1]");
        total += p;
    }
    if (fallback)
        *fallback = total == 0.0;
    std::vector<double> weights(accuracies.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        weights[i] = total == 0.0 ? 1.0 / static_cast<double>(weights.size()) : accuracies[i] / total;
    return weights;
}

ParamVector weighted_average(std::span<const ParamVector> models, std::span<const double> weights) {
    if (models.empty())
        throw AggregationError("nothing to aggregate");
    if (models.size() != weights.size())
        throw AggregationError(std::to_string(models.size()) + " models but " + std::to_string(weights.size()) +
                               " weights");
    ParamVector out{models.front().arch, std::vector<double>(models.front().size(), 0.0)};
    for (std::size_t k = 0; k < models.size(); ++k) {
        if (models[k].size() != out.size() || models[k].arch != out.arch)
            throw AggregationError("model " + std::to_string(k) + " has a different shape");
        const double wk = weights[k];
        for (std::size_t i = 0; i < out.size(); ++i)
            out.values[i] += wk * models[k].values[i];
    }
    return out;
}

AggregationResult aggregate_fedavg(std::span<const ParamVector> models, std::span<const std::size_t> sizes) {
    if (models.size() != sizes.size())
        throw AggregationError(std::to_string(models.size()) + " models but " + std::to_string(sizes.size()) +
                               " sizes");
    auto weights = fedavg_weights(sizes);
    auto model = weighted_average(models, weights);
    return {std::move(model), std::move(weights), false};
}

AggregationResult aggregate_fedpdc(std::span<const ParamVector> models, std::span<const double> accuracies) {
    if (models.size() != accuracies.size())
        throw AggregationError(std::to_string(models.size()) + " models but " + std::to_string(accuracies.size()) +
                               " accuracies");
    bool fallback = false;
    auto weights = fedpdc_weights(accuracies, &fallback);
    auto model = weighted_average(models, weights);
    return {std::move(model), std::move(weights), fallback};
}

ServerState ServerState::start(ParamVector initial, std::optional<ServerSet> server_set, std::size_t num_clients) {
    ServerState s;
    s.global = std::move(initial);
    s.server_set = std::move(server_set);
    s.ledger.assign(num_clients, 1.0);
    s.last_selected.assign(num_clients, 0);
    if (s.server_set)
        s.global_acc_server = evaluate_accuracy(s.global, s.server_set->data);
    return s;
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> workers;
        for (std::size_t t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure)
                            failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure)
        std::rethrow_exception(failure);
}

RoundRecord run_round(ServerState& server, std::span<const ClientState> clients, const StrategyConfig& base_strategy,
                      const TrainConfig& train, const RoundOptions& options) {
    base_strategy.validate();
    train.validate();
    if (clients.empty())
        throw ConfigError("run_round needs at least one client");
    if (base_strategy.is_fedpdc() && !server.server_set)
        throw EvaluationError("FedPDC needs a nonempty server set");
    if (server.ledger.size() != clients.size() || server.last_selected.size() != clients.size())
        throw StateError("server ledger does not match the client count");

    const std::size_t round = server.round + 1;
    const auto strategy = resolve_round_strategy(base_strategy, round);

    RoundRecord record;
    record.round = round;
    record.lambda = strategy.is_fedpdc() ? strategy.lambda : 0.0;
    record.selected = sample_clients(clients.size(), strategy.tau, round, train.seed);
    const auto m = record.selected.size();

    // Clients that sat out the previous round start from p = 1.
    for (auto id : record.selected) {
        const bool fresh = server.last_selected[id] == 0 || server.last_selected[id] + 1 != round;
        record.sent_accuracy.push_back(fresh ? 1.0 : server.ledger[id]);
    }

    if (options.instrument_global_loss || options.emit_dissimilarity) {
        const auto obj = global_objective(server.global, clients);
        double sq = 0.0;
        for (double g : obj.gradient)
            sq += g * g;
        if (options.instrument_global_loss)
            record.objective_before = ObjectiveProbe{obj.loss, sq};
        if (options.emit_dissimilarity) {
            const auto gd = gradient_dissimilarity(obj.client_gradients, obj.client_weights);
            record.gradient_dissimilarity = gd.value;
            if (!gd.value)
                record.flags.emplace_back("grad_dissimilarity_undefined");
        }
    }

    std::vector<LocalResult> locals(m);
    parallel_for(m, options.threads, [&](std::size_t k) {
        const auto id = record.selected[k];
        locals[k] = local_train(clients[id], server.global, record.sent_accuracy[k], train, strategy, round);
    });

    std::vector<ParamVector> models;
    models.reserve(m);
    double loss_total = 0.0;
    for (auto& l : locals) {
        loss_total += l.mean_loss();
        models.push_back(std::move(l.model));
    }
    record.mean_local_loss = loss_total / static_cast<double>(m);

    if (server.server_set) {
        record.scored_accuracy.resize(m);
        parallel_for(m, options.threads, [&](std::size_t k) {
            record.scored_accuracy[k] = evaluate_accuracy(models[k], server.server_set->data);
        });
    }

    AggregationResult agg;
    try {
        if (strategy.is_fedpdc()) {
            agg = aggregate_fedpdc(models, record.scored_accuracy);
        } else {
            std::vector<std::size_t> sizes;
            for (auto id : record.selected)
                sizes.push_back(clients[id].data.size());
            agg = aggregate_fedavg(models, sizes);
        }
    } catch (const AggregationError& e) {
        throw AggregationError("round " + std::to_string(round) + ": " + e.what());
    }
    if (agg.uniform_fallback)
        record.flags.emplace_back("uniform_fallback");
    record.weights = std::move(agg.weights);

    server.global = std::move(agg.model);
    server.round = round;
    for (std::size_t k = 0; k < m; ++k) {
        const auto id = record.selected[k];
        server.last_selected[id] = round;
        if (!record.scored_accuracy.empty())
            server.ledger[id] = record.scored_accuracy[k];
    }
    if (server.server_set) {
        server.global_acc_server = evaluate_accuracy(server.global, server.server_set->data);
        const auto report = dissimilarity_B(server.global_acc_server, record.scored_accuracy);
        record.accuracy_dissimilarity = report.per_client;
        if (std::find(report.infinite.begin(), report.infinite.end(), true) != report.infinite.end())
            record.flags.emplace_back("zero_client_accuracy");
    }
    record.global_acc_server = server.global_acc_server;
    if (options.test_set)
        record.global_acc_test = evaluate_accuracy(server.global, *options.test_set);

    if (options.instrument_global_loss) {
        const auto obj = global_objective(server.global, clients);
        double sq = 0.0;
        for (double g : obj.gradient)
            sq += g * g;
        record.objective_after = ObjectiveProbe{obj.loss, sq};
    }
    return record;
}

} // namespace fedsim
