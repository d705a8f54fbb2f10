// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "fedsim/config.hpp"
#include "fedsim/diagnostics.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/text.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace fedsim;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double gradient_rel_tol = 1e-4;
constexpr double gradient_rel_floor = 1e-6;
constexpr double gradient_fd_step = 1e-5;
constexpr double gradient_budget_s = 10.0;
constexpr double weight_sum_tol = 1e-12;
constexpr double mean_tol = 1e-12;
constexpr double convex_tol = 1e-12;
constexpr double centralized_step_tol = 1e-9;
constexpr double penalty_tol = 1e-12;
constexpr double iid_relative_tol = 0.05;
constexpr double bgrad_identity_tol = 1e-9;
constexpr double bgrad_jensen_tol = 1e-9;
constexpr double theorem_tol = 1e-12;
constexpr int replication_seeds_needed = 4;
constexpr double replication_budget_s = 600.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

ParamVector jittered(const ModelArch& arch, std::uint64_t seed) {
    auto m = init_model(arch, seed);
    Rng rng(mix_seed({seed, 0x717}));
    for (auto& v : m.values)
        v += 0.1 * rng.normal();
    return m;
}

Batch random_batch(std::size_t rows, std::size_t dim, int classes, Rng& rng) {
    Batch b{Matrix(rows, dim), {}};
    for (auto& v : b.features.data())
        v = rng.normal();
    for (std::size_t i = 0; i < rows; ++i)
        b.labels.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(classes))));
    return b;
}

std::vector<ClientState> clients_of(const LabeledDataset& data, const Partition& part) {
    std::vector<ClientState> out;
    for (std::size_t k = 0; k < part.num_clients(); ++k)
        out.push_back({k, data.subset(part.client_indices[k])});
    return out;
}

std::vector<const LabeledDataset*> datasets_of(const std::vector<ClientState>& clients) {
    std::vector<const LabeledDataset*> out;
    for (const auto& c : clients)
        out.push_back(&c.data);
    return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig toy_config() {
    ExperimentConfig c;
    c.num_classes = 4;
    c.samples_per_class = 60;
    c.input_dim = 6;
    c.cluster_spread = 0.6;
    c.test_per_class = 20;
    c.hidden = {12};
    c.clients = 5;
    c.beta = 0.3;
    c.per_class = 8;
    c.train.local_epochs = 2;
    c.train.batch_size = 16;
    c.train.seed = 21;
    return c;
}

Outcome gradient_oracle() {
    const auto start = Clock::now();
    const std::vector<ModelArch> archs = {ModelArch{{4, 6, 3}}, ModelArch{{5, 8, 8, 4}}, ModelArch{{3, 2}},
                                          ModelArch{{6, 10, 5}}};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto& arch = archs[seed % archs.size()];
        const auto model = jittered(arch, seed);
        Rng rng(mix_seed({seed, 0xba7c}));
        const auto batch = random_batch(3 + seed % 7, arch.layer_widths.front(),
                                        static_cast<int>(arch.layer_widths.back()), rng);
        const auto g = backward(model, batch);
        const auto fd = finite_diff_grad(model, batch, gradient_fd_step);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double scale = std::max({std::abs(g[i]), std::abs(fd[i]), gradient_rel_floor});
            worst = std::max(worst, std::abs(g[i] - fd[i]) / scale);
        }
    }
    const double elapsed = seconds_since(start);
    return {worst < gradient_rel_tol && elapsed < gradient_budget_s,
            "20 pairs, max relative error " + fmt("%.2e", worst) + " (< 1e-4), " + fmt("%.2f", elapsed) +
                " s (< 10 s)"};
}

Outcome aggregation_identities() {
    Rng rng(404);
    double worst_sum = 0.0, worst_mean = 0.0, worst_bound = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const ModelArch arch{{1 + rng.below(5), 1 + rng.below(4)}};
        const auto k = 1 + rng.below(10);
        std::vector<ParamVector> models;
        std::vector<double> accs;
        std::vector<std::size_t> sizes;
        for (std::uint64_t i = 0; i < k; ++i) {
            ParamVector m{arch, std::vector<double>(arch.param_count())};
            for (auto& v : m.values)
                v = rng.uniform(-100, 100);
            models.push_back(std::move(m));
            accs.push_back(rng.uniform());
            sizes.push_back(1 + rng.below(5000));
        }
        for (const auto& r : {aggregate_fedavg(models, sizes), aggregate_fedpdc(models, accs)}) {
            double total = 0.0;
            for (double w : r.weights)
                total += w;
            worst_sum = std::max(worst_sum, std::abs(total - 1.0));
            for (std::size_t i = 0; i < r.model.size(); ++i) {
                double lo = INFINITY, hi = -INFINITY;
                for (const auto& m : models) {
                    lo = std::min(lo, m.values[i]);
                    hi = std::max(hi, m.values[i]);
                }
                worst_bound = std::max({worst_bound, lo - r.model.values[i], r.model.values[i] - hi});
            }
        }
        const std::vector<double> equal(k, rng.uniform_open());
        const auto pdc = aggregate_fedpdc(models, equal);
        for (std::size_t i = 0; i < pdc.model.size(); ++i) {
            double sum = 0.0;
            for (const auto& m : models)
                sum += m.values[i];
            worst_mean = std::max(worst_mean, std::abs(pdc.model.values[i] - sum / static_cast<double>(k)));
        }
    }
    const bool ok = worst_sum <= weight_sum_tol && worst_mean <= mean_tol && worst_bound <= convex_tol;
    return {ok, "100 inputs, weight-sum error " + fmt("%.1e", worst_sum) + ", equal-accuracy mean error " +
                    fmt("%.1e", worst_mean) + ", bound excess " + fmt("%.1e", std::max(0.0, worst_bound))};
}

Outcome reduction_equivalences() {
    const auto cfg = toy_config();
    const auto sim = prepare_simulation(cfg);

    StrategyConfig prox;
    prox.strategy = Strategy::fedprox;
    prox.mu_prox = 0.0;
    StrategyConfig avg;
    auto a = ServerState::start(sim.initial, sim.split.server, sim.clients.size());
    auto b = ServerState::start(sim.initial, sim.split.server, sim.clients.size());
    bool bitwise = true;
    for (int t = 0; t < 10; ++t) {
        run_round(a, sim.clients, prox, cfg.train);
        run_round(b, sim.clients, avg, cfg.train);
        bitwise = bitwise && a.global == b.global;
    }

    TrainConfig step = cfg.train;
    step.local_epochs = 1;
    step.batch_size = sim.split.remainder.size();
    step.momentum = 0.0;
    step.weight_decay = 0.0;
    step.lr = 0.1;
    auto c = ServerState::start(sim.initial, sim.split.server, sim.clients.size());
    run_round(c, sim.clients, avg, step);
    const auto pooled = loss_and_gradient(sim.initial, sim.split.remainder.samples());
    std::vector<double> expected(sim.initial.values);
    for (std::size_t i = 0; i < expected.size(); ++i)
        expected[i] -= step.lr * pooled.gradient[i];
    const double diff = max_abs_diff(c.global.values, expected);

    return {bitwise && diff <= centralized_step_tol,
            std::string("fedprox(mu=0) vs fedavg over 10 rounds ") + (bitwise ? "bitwise equal" : "DIFFER") +
                "; one full-batch round vs centralized step max diff " + fmt("%.1e", diff) + " (<= 1e-9)"};
}

Outcome literal_penalty_neutrality() {
    const auto cfg = toy_config();
    const auto sim = prepare_simulation(cfg);
    StrategyConfig zero;
    zero.strategy = Strategy::fedpdc;
    zero.tau = 0.6;
    zero.lambda = 0.0;
    auto ten = zero;
    ten.lambda = 10.0;

    auto a = ServerState::start(sim.initial, sim.split.server, sim.clients.size());
    auto b = ServerState::start(sim.initial, sim.split.server, sim.clients.size());
    bool models_equal = true;
    double worst = 0.0;
    std::size_t batches = 0;
    std::size_t penalized = 0;
    for (std::size_t t = 1; t <= 8; ++t) {
        const auto global = a.global;
        const auto ra = run_round(a, sim.clients, zero, cfg.train);
        run_round(b, sim.clients, ten, cfg.train);
        models_equal = models_equal && a.global == b.global;
        for (std::size_t k = 0; k < ra.selected.size(); ++k) {
            const auto& client = sim.clients[ra.selected[k]];
            const double p = ra.sent_accuracy[k];
            const auto la = local_train(client, global, p, cfg.train, zero, t);
            const auto lb = local_train(client, global, p, cfg.train, ten, t);
            models_equal = models_equal && la.model == lb.model;
            for (std::size_t i = 0; i < la.batch_losses.size(); ++i) {
                worst = std::max(worst, std::abs((lb.batch_losses[i] - la.batch_losses[i]) - 10.0 * (1.0 - p)));
                ++batches;
            }
            penalized += p < 1.0;
        }
    }
    return {models_equal && worst <= penalty_tol && penalized > 0,
            std::string("lambda 0 vs 10 models ") + (models_equal ? "bitwise equal" : "DIFFER") + "; " +
                std::to_string(batches) + " batches, max |delta - lambda(1-p)| " + fmt("%.1e", worst) +
                " (<= 1e-12), " + std::to_string(penalized) + " client-rounds with p < 1"};
}

Outcome partition_statistics() {
    double worst_rel = 0.0;
    bool entropy_ok = true;
    bool conserved = true;
    std::string entropies;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto pool = generate_synthetic({8, 200, 16, 0.6, seed});
        const auto global = pool.class_histogram();
        for (double beta : {1e6, 0.1, 10.0}) {
            const auto part = dirichlet_partition(pool, 10, beta, seed);
            std::vector<int> seen(pool.size(), 0);
            for (const auto& list : part.client_indices)
                for (auto i : list)
                    ++seen[i];
            conserved = conserved && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
        }
        for (const auto& counts : partition_stats(dirichlet_partition(pool, 10, 1e6, seed), pool)) {
            double total = 0.0;
            for (auto n : counts)
                total += static_cast<double>(n);
            for (std::size_t c = 0; c < counts.size(); ++c) {
                const double g = static_cast<double>(global[c]) / static_cast<double>(pool.size());
                worst_rel = std::max(worst_rel, std::abs(static_cast<double>(counts[c]) / total - g) / g);
            }
        }
        auto mean_entropy = [&](double beta) {
            const auto h = client_label_entropy(partition_stats(dirichlet_partition(pool, 10, beta, seed), pool));
            double s = 0.0;
            for (double v : h)
                s += v;
            return s / static_cast<double>(h.size());
        };
        const double low = mean_entropy(0.1);
        const double high = mean_entropy(10.0);
        entropy_ok = entropy_ok && low < high;
        entropies += (seed > 1 ? " " : "") + fmt("%.3f", low) + "<" + fmt("%.3f", high);
    }
    return {worst_rel <= iid_relative_tol && entropy_ok && conserved,
            "beta=1e6 max relative deviation " + fmt("%.4f", worst_rel) + " (<= 0.05); entropy beta=0.1 vs 10: " +
                entropies + "; conservation " + (conserved ? "exact" : "BROKEN")};
}

Outcome dissimilarity_sanity() {
    const auto pool = generate_synthetic({8, 200, 16, 0.6, 3});
    const ModelArch arch{{16, 32, 8}};

    const auto shared = pool.subset([&] {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pool.size(); i += 5)
            idx.push_back(i);
        return idx;
    }());
    std::vector<ClientState> twins;
    for (std::size_t k = 0; k < 4; ++k)
        twins.push_back({k, shared});
    const auto w = init_model(arch, 3);
    const auto ident = gradient_dissimilarity(w, datasets_of(twins));
    const double ident_dev = ident.value ? std::abs(*ident.value - 1.0) : INFINITY;

    TrainConfig train;
    train.local_epochs = 1;
    const auto local = local_train(twins[0], w, 1.0, train, StrategyConfig{}, 1).model;
    const std::vector<ParamVector> locals(4, local);
    const auto agg = aggregate_fedavg(locals, std::vector<std::size_t>(4, shared.size()));
    std::vector<double> p;
    for (const auto& m : locals)
        p.push_back(evaluate_accuracy(m, pool));
    const auto acc_b = dissimilarity_B(evaluate_accuracy(agg.model, pool), p);

    double min_ratio = INFINITY;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(mix_seed({seed, 0xd155}));
        const auto data = generate_synthetic({static_cast<int>(2 + rng.below(6)), 30 + rng.below(40),
                                              2 + rng.below(8), rng.uniform(0.2, 1.5), seed});
        const auto part = dirichlet_partition(data, 2 + rng.below(8), rng.uniform(0.05, 2.0), seed);
        const auto clients = clients_of(data, part);
        const ModelArch a{{data.features().cols(), 4 + rng.below(12), static_cast<std::size_t>(data.num_classes())}};
        const auto r = gradient_dissimilarity(jittered(a, seed), datasets_of(clients));
        if (r.value)
            min_ratio = std::min(min_ratio, *r.value);
    }

    double skewed = 0.0, balanced = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto model = init_model(arch, seed);
        const auto data = generate_synthetic({8, 200, 16, 0.6, seed});
        skewed += *gradient_dissimilarity(model, datasets_of(clients_of(data, dirichlet_partition(data, 10, 0.1, seed)))).value;
        balanced += *gradient_dissimilarity(model, datasets_of(clients_of(data, dirichlet_partition(data, 10, 1e6, seed)))).value;
    }
    skewed /= 5.0;
    balanced /= 5.0;

    const bool ok = ident_dev <= bgrad_identity_tol && acc_b.max_b == 1.0 && min_ratio >= 1.0 - bgrad_jensen_tol &&
                    skewed > balanced;
    return {ok, "identical data |B_grad-1| " + fmt("%.1e", ident_dev) + ", accuracy B " + fmt("%g", acc_b.max_b) +
                    "; min B_grad over 50 instances " + fmt("%.4f", min_ratio) + "; mean B_grad beta=0.1 " +
                    fmt("%.3f", skewed) + " vs beta=1e6 " + fmt("%.3f", balanced)};
}

double reference_theorem_constant(double L, double Lm, double mu, double B, double K) {
    const double mb = mu - Lm;
    const double t1 = 1.0 / mu;
    const double t2 = L * B / (mb * mu);
    const double t3 = L * B * B / (2.0 * mb * mb);
    const double t4 = 2.0 * L * B * B / (K * mb * mb);
    const double t5 = (1.0 + 2.0 * L * B / mb) * (std::sqrt(2.0) * B / (mb * std::sqrt(K)));
    return t1 - t2 - t3 - t4 + t5;
}

Outcome theorem_constant_check() {
    Rng rng(2718);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        TheoremConstants c;
        c.mu = rng.uniform(0.05, 10.0);
        c.L_minus = rng.uniform(-2.0, c.mu * 0.95);
        c.L = rng.uniform(0.0, 10.0);
        c.B = rng.uniform(1.0, 10.0);
        c.K = static_cast<double>(1 + rng.below(1000));
        const double expect = reference_theorem_constant(c.L, c.L_minus, c.mu, c.B, c.K);
        worst = std::max(worst, std::abs(theorem_constant(c).lambda - expect) / std::max(1.0, std::abs(expect)));
    }
    bool closed_form = true;
    for (int i = 0; i < 20; ++i) {
        TheoremConstants c;
        c.L = 0.0;
        c.mu = rng.uniform(0.05, 10.0);
        c.L_minus = rng.uniform(-2.0, c.mu * 0.95);
        c.B = rng.uniform(1.0, 10.0);
        c.K = static_cast<double>(1 + rng.below(1000));
        const double expect = 1.0 / c.mu + std::sqrt(2.0) * c.B / (c.mu_bar() * std::sqrt(c.K));
        const auto got = theorem_constant(c);
        closed_form = closed_form && got.lambda == expect && got.applicable;
    }
    return {worst <= theorem_tol && closed_form,
            "100 tuples, max scaled error " + fmt("%.1e", worst) + " (<= 1e-12); L=0 closed form " +
                (closed_form ? "exact" : "MISMATCH")};
}

ExperimentConfig desk_config(Strategy strategy, std::uint64_t seed, const fs::path& dir) {
    ExperimentConfig c;
    c.num_classes = 8;
    c.samples_per_class = 200;
    c.input_dim = 16;
    c.cluster_spread = 0.6;
    c.test_per_class = 100;
    c.hidden = {32};
    c.clients = 10;
    c.beta = 0.1;
    c.per_class = 32;
    c.strategy.strategy = strategy;
    c.strategy.penalty_mode = PenaltyMode::literal;
    c.strategy.tau = 1.0;
    c.train.rounds = 50;
    c.train.seed = seed;
    c.instrument_global_loss = true;
    c.output_dir = dir.string();
    return c;
}

struct Replication {
    std::vector<RunResult> fedavg;
    std::vector<RunResult> fedpdc;
    double seconds = 0.0;
};

std::vector<double> test_curve(const RunResult& r) {
    std::vector<double> out;
    for (const auto& rec : r.records)
        out.push_back(rec.global_acc_test.value_or(std::nan("")));
    return out;
}

Outcome directional_replication(const Replication& rep) {
    double avg_mean = 0.0, pdc_mean = 0.0;
    int reached = 0;
    std::string per_seed;
    for (std::size_t s = 0; s < rep.fedavg.size(); ++s) {
        const auto avg = test_curve(rep.fedavg[s]);
        const auto pdc = test_curve(rep.fedpdc[s]);
        avg_mean += avg.back();
        pdc_mean += pdc.back();
        const double target = avg.back();
        const auto base_rounds = rounds_to_target(avg, target);
        const auto cand_rounds = rounds_to_target(pdc, target);
        if (cand_rounds && *cand_rounds <= 50)
            ++reached;
        per_seed += "\n      seed " + std::to_string(s + 1) + ": fedavg " + fmt("%.4f", avg.back()) + " fedpdc " +
                    fmt("%.4f", pdc.back()) + ", rounds to " + fmt("%.4f", target) + ": fedavg " +
                    std::to_string(*base_rounds) + " fedpdc " +
                    (cand_rounds ? std::to_string(*cand_rounds) : std::string("none")) + ", speedup " +
                    format_speedup(speedup(base_rounds, cand_rounds));
    }
    avg_mean /= static_cast<double>(rep.fedavg.size());
    pdc_mean /= static_cast<double>(rep.fedpdc.size());
    const bool ok = pdc_mean >= avg_mean && reached >= replication_seeds_needed && rep.seconds < replication_budget_s;
    return {ok, "mean final test accuracy fedpdc " + fmt("%.5f", pdc_mean) + " vs fedavg " + fmt("%.5f", avg_mean) +
                    "; fedpdc reaches fedavg's round-50 accuracy within 50 rounds in " + std::to_string(reached) +
                    "/5 seeds (need >= 4); " + fmt("%.1f", rep.seconds) + " s (< 600 s)" + per_seed};
}

Outcome descent_monitoring(const Replication& rep) {
    struct Tally {
        double mean = 0.0;
        std::size_t violations = 0;
        std::size_t rounds = 0;
    };
    auto tally = [](const std::vector<RunResult>& runs) {
        Tally t;
        for (const auto& r : runs) {
            const auto summary = descent_check(r.records);
            t.mean += summary.mean_rate / static_cast<double>(runs.size());
            t.violations += summary.violations.size();
            t.rounds += summary.rounds.size();
        }
        return t;
    };
    const auto pdc = tally(rep.fedpdc);
    const auto avg = tally(rep.fedavg);
    return {pdc.mean > 0.0, "fedpdc seed-averaged mean implied rate " + fmt("%.4g", pdc.mean) + " (> 0), " +
                                std::to_string(pdc.violations) + "/" + std::to_string(pdc.rounds) +
                                " non-descent rounds; fedavg " + fmt("%.4g", avg.mean) + ", " +
                                std::to_string(avg.violations) + "/" + std::to_string(avg.rounds)};
}

Outcome end_to_end_determinism(const fs::path& root) {
    bool identical = true;
    std::string checked;
    for (auto strategy : {Strategy::fedavg, Strategy::fedpdc}) {
        const std::string name(to_string(strategy));
        const auto first = root / ("seed_1_" + name);
        const auto again = root / ("rerun_seed_1_" + name);
        run_experiment(desk_config(strategy, 1, again));
        for (const char* f : {"rounds.csv", "diagnostics.csv", "model.bin"}) {
            const auto a = slurp(first / f);
            identical = identical && !a.empty() && a == slurp(again / f);
        }
        checked += (checked.empty() ? "" : ", ") + name;
    }
    return {identical, "seed 1 " + checked + " rerun: rounds.csv, diagnostics.csv, model.bin " +
                           (identical ? "byte-identical" : "DIFFER")};
}

} // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / "fedsim_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
    };

    report(1, "gradient oracle", gradient_oracle);
    report(2, "aggregation identities", aggregation_identities);
    report(3, "reduction equivalences", reduction_equivalences);
    report(4, "literal-penalty neutrality", literal_penalty_neutrality);
    report(5, "partition statistics", partition_statistics);
    report(6, "dissimilarity sanity", dissimilarity_sanity);
    report(7, "theorem constant", theorem_constant_check);

    Replication rep;
    std::string rep_error;
    try {
        const auto start = Clock::now();
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            rep.fedavg.push_back(run_experiment(
                desk_config(Strategy::fedavg, seed, root / ("seed_" + std::to_string(seed) + "_fedavg"))));
            rep.fedpdc.push_back(run_experiment(
                desk_config(Strategy::fedpdc, seed, root / ("seed_" + std::to_string(seed) + "_fedpdc"))));
        }
        rep.seconds = seconds_since(start);
    } catch (const std::exception& e) {
        rep_error = e.what();
    }
    auto needs_runs = [&](std::function<Outcome()> check) {
        return [&, check] { return rep_error.empty() ? check() : Outcome{false, "runs failed: " + rep_error}; };
    };
    report(8, "directional desk-scale replication", needs_runs([&] { return directional_replication(rep); }));
    report(9, "descent monitoring", needs_runs([&] { return descent_monitoring(rep); }));
    report(10, "end-to-end determinism", needs_runs([&] { return end_to_end_determinism(root); }));

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
