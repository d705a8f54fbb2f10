#include "fedsim/selfcheck.hpp"

#include "fedsim/diagnostics.hpp"
#include "fedsim/engine.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>

namespace fedsim {

namespace {

bool gradient_matches_finite_differences() {
    const ModelArch arch{{3, 5, 4}};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto model = init_model(arch, seed);
        Rng rng(mix_seed({seed, 77}));
        Batch batch{Matrix(6, 3), {}};
        for (auto& v : batch.features.data())
            v = rng.normal();
        for (int i = 0; i < 6; ++i)
            batch.labels.push_back(static_cast<int>(rng.below(4)));
        const auto g = backward(model, batch);
        const auto fd = finite_diff_grad(model, batch, 1e-5);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double scale = std::max({std::abs(g[i]), std::abs(fd[i]), 1e-6});
            if (std::abs(g[i] - fd[i]) / scale > 1e-4)
                return false;
        }
    }
    return true;
}

bool aggregation_is_convex() {
    Rng rng(5);
    const ModelArch arch{{2, 2}};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ParamVector> models;
        std::vector<double> accs;
        std::vector<std::size_t> sizes;
        for (int k = 0; k < 4; ++k) {
            ParamVector m{arch, std::vector<double>(arch.param_count())};
            for (auto& v : m.values)
                v = rng.uniform(-3, 3);
            models.push_back(std::move(m));
            accs.push_back(rng.uniform());
            sizes.push_back(1 + rng.below(100));
        }
        for (const auto& agg : {aggregate_fedavg(models, sizes), aggregate_fedpdc(models, accs)}) {
            double total = 0.0;
            for (double w : agg.weights)
                total += w;
            if (std::abs(total - 1.0) > 1e-12)
                return false;
            for (std::size_t i = 0; i < agg.model.size(); ++i) {
                double lo = models[0].values[i], hi = lo;
                for (const auto& m : models) {
                    lo = std::min(lo, m.values[i]);
                    hi = std::max(hi, m.values[i]);
                }
                if (agg.model.values[i] < lo - 1e-12 || agg.model.values[i] > hi + 1e-12)
                    return false;
            }
        }
    }
    return true;
}

bool partition_conserves_indices() {
    const auto data = generate_synthetic({4, 60, 3, 0.5, 11});
    for (double beta : {0.1, 1.0, 100.0}) {
        const auto p = dirichlet_partition(data, 6, beta, 3);
        std::vector<int> seen(data.size(), 0);
        for (const auto& list : p.client_indices)
            for (auto i : list)
                ++seen[i];
        if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
            return false;
    }
    return true;
}

bool rounds_are_deterministic() {
    const auto data = generate_synthetic({3, 40, 4, 0.4, 2});
    const auto split = build_server_set(data, 5, 1);
    const auto part = dirichlet_partition(split.remainder, 3, 0.5, 1);
    std::vector<ClientState> clients;
    for (std::size_t k = 0; k < part.num_clients(); ++k)
        clients.push_back({k, split.remainder.subset(part.client_indices[k])});
    StrategyConfig strategy;
    strategy.strategy = Strategy::fedpdc;
    TrainConfig train;
    train.local_epochs = 2;
    train.batch_size = 16;
    auto run = [&] {
        auto server = ServerState::start(init_model({{4, 8, 3}}, 9), split.server, clients.size());
        for (int t = 0; t < 3; ++t)
            run_round(server, clients, strategy, train);
        return server.global;
    };
    return run() == run();
}

} // namespace

bool run_self_check(std::ostream& out) {
    const std::pair<const char*, std::function<bool()>> checks[] = {
        {"gradient matches central finite differences", gradient_matches_finite_differences},
        {"aggregation weights sum to 1 and stay convex", aggregation_is_convex},
        {"Dirichlet partition conserves every index", partition_conserves_indices},
        {"federated rounds are bitwise deterministic", rounds_are_deterministic},
    };
    bool all = true;
    for (const auto& [name, check] : checks) {
        const bool ok = check();
        all = all && ok;
        out << (ok ? "PASS  " : "FAIL  ") << name << '\n';
    }
    return all;
}

} // namespace fedsim
