#include "fedsim/partition.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

namespace fedsim {

std::vector<std::size_t> largest_remainder_counts(std::span<const double> proportions, std::size_t total) {
    std::vector<std::size_t> counts(proportions.size(), 0);
    std::vector<double> fractions(proportions.size(), 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < proportions.size(); ++i) {
        const double exact = proportions[i] * static_cast<double>(total);
        const double whole = std::floor(exact);
        counts[i] = static_cast<std::size_t>(whole);
        fractions[i] = exact - whole;
        assigned += counts[i];
    }
    // Floating error can push the floors one above total; trim from the smallest fractions.
    std::vector<std::size_t> order(proportions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fractions[a] > fractions[b]; });
    while (assigned > total) {
        for (auto it = order.rbegin(); it != order.rend() && assigned > total; ++it) {
            if (counts[*it] > 0) {
                --counts[*it];
                --assigned;
            }
        }
    }
    for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
        ++counts[order[k]];
        ++assigned;
    }
    return counts;
}

namespace {

std::vector<std::vector<std::size_t>> draw_split(const std::vector<std::vector<std::size_t>>& by_class,
                                                 std::size_t num_clients, double beta,
                                                 std::uint64_t seed) {
    std::vector<std::vector<std::size_t>> clients(num_clients);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        Rng rng(mix_seed({seed, c}));
        auto members = by_class[c];
        rng.shuffle(std::span(members));
        const auto proportions = rng.dirichlet(num_clients, beta);
        const auto counts = largest_remainder_counts(proportions, members.size());
        std::size_t offset = 0;
        for (std::size_t k = 0; k < num_clients; ++k) {
            clients[k].insert(clients[k].end(), members.begin() + static_cast<std::ptrdiff_t>(offset),
                              members.begin() + static_cast<std::ptrdiff_t>(offset + counts[k]));
            offset += counts[k];
        }
    }
    for (auto& list : clients)
        std::sort(list.begin(), list.end());
    return clients;
}

} // namespace

Partition dirichlet_partition(const LabeledDataset& dataset, std::size_t num_clients, double beta,
                              std::uint64_t seed) {
    if (num_clients < 1)
        throw ConfigError("partition needs at least one client");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw ConfigError("Dirichlet beta must be a finite positive number");
    if (dataset.size() < num_clients)
        throw PartitionError("dataset has " + std::to_string(dataset.size()) + " samples, fewer than " +
                             std::to_string(num_clients) + " clients");

    const auto by_class = dataset.indices_by_class();
    for (int attempt = 0; attempt <= max_partition_redraws; ++attempt) {
        auto clients = draw_split(by_class, num_clients, beta, seed + static_cast<std::uint64_t>(attempt));
        const bool any_empty =
            std::any_of(clients.begin(), clients.end(), [](const auto& l) { return l.empty(); });
        if (!any_empty)
            return Partition{std::move(clients), beta, seed, attempt};
    }
    throw PartitionError("every Dirichlet draw left a client without data after " +
                         std::to_string(max_partition_redraws) +
                         " redraws; use a larger dataset, fewer clients, or a larger beta");
}

ServerSplit build_server_set(const LabeledDataset& dataset, std::size_t per_class, std::uint64_t seed) {
    if (per_class < 1)
        throw ConfigError("server set needs at least one sample per class");
    const auto by_class = dataset.indices_by_class();
    std::vector<char> taken(dataset.size(), 0);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < per_class)
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                            " samples, server set needs " + std::to_string(per_class));
        Rng rng(mix_seed({seed, 0x5e7, c}));
        auto members = by_class[c];
        rng.shuffle(std::span(members));
        for (std::size_t k = 0; k < per_class; ++k)
            taken[members[k]] = 1;
    }
    std::vector<std::size_t> server_idx;
    std::vector<std::size_t> rest_idx;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        (taken[i] ? server_idx : rest_idx).push_back(i);
    if (rest_idx.empty())
        throw DataError("server set consumed every sample; nothing left for clients");

    std::vector<std::size_t> counts(by_class.size(), per_class);
    return ServerSplit{ServerSet{dataset.subset(server_idx), server_idx, std::move(counts)},
                       dataset.subset(rest_idx), rest_idx};
}

std::vector<std::vector<std::size_t>> partition_stats(const Partition& partition,
                                                      const LabeledDataset& dataset) {
    std::vector<std::vector<std::size_t>> counts(
        partition.num_clients(), std::vector<std::size_t>(static_cast<std::size_t>(dataset.num_classes()), 0));
    for (std::size_t k = 0; k < partition.num_clients(); ++k)
        for (auto i : partition.client_indices[k])
            ++counts[k][static_cast<std::size_t>(dataset.labels()[i])];
    return counts;
}

std::vector<double> client_label_entropy(const std::vector<std::vector<std::size_t>>& stats) {
    std::vector<double> out;
    out.reserve(stats.size());
    for (const auto& row : stats) {
        const double total = static_cast<double>(std::accumulate(row.begin(), row.end(), std::size_t{0}));
        double h = 0.0;
        for (auto n : row) {
            if (n == 0)
                continue;
            const double p = static_cast<double>(n) / total;
            h -= p * std::log(p);
        }
        out.push_back(h);
    }
    return out;
}

void write_partition_manifest(const Partition& partition, const std::filesystem::path& path,
                              std::span<const std::size_t> index_map) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write partition manifest " + path.string());
    for (std::size_t k = 0; k < partition.num_clients(); ++k) {
        std::vector<std::size_t> ids = partition.client_indices[k];
        if (!index_map.empty())
            for (auto& i : ids)
                i = index_map[i];
        std::sort(ids.begin(), ids.end());
        out << k << ':';
        for (std::size_t j = 0; j < ids.size(); ++j)
            out << (j ? "," : "") << ids[j];
        out << '\n';
    }
    if (!out)
        throw IoError("write failed for " + path.string());
}

} // namespace fedsim
