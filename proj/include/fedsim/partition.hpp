#pragma once

#include "fedsim/dataset.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fedsim {

/// Per-client index lists into one LabeledDataset. Lists are disjoint, sorted
/// ascending, and nonempty.
struct Partition {
    std::vector<std::vector<std::size_t>> client_indices;
    double beta = 0.0;
    std::uint64_t seed = 0;
    /// Seed offset that produced a partition with no empty client (0 = first draw).
    int redraws = 0;

    std::size_t num_clients() const noexcept { return client_indices.size(); }
};

inline constexpr int max_partition_redraws = 100;

/// Label-skew split: for every class, client proportions ~ Dir(beta, ..., beta)
/// and the class's (shuffled) indices are cut by largest-remainder rounding so
/// counts are conserved exactly. A draw that leaves some client empty is
/// redrawn with seed + 1, up to max_partition_redraws times.
Partition dirichlet_partition(const LabeledDataset& dataset, std::size_t num_clients, double beta,
                              std::uint64_t seed);

/// Rounds proportions * total to integers summing to total. Ties on the
/// fractional part go to the lower index.
std::vector<std::size_t> largest_remainder_counts(std::span<const double> proportions, std::size_t total);

/// Class-balanced public set held by the server.
struct ServerSet {
    LabeledDataset data;
    /// Indices into the source dataset, ascending.
    std::vector<std::size_t> source_indices;
    std::vector<std::size_t> class_counts;
};

struct ServerSplit {
    ServerSet server;
    LabeledDataset remainder;
    /// remainder row i is source row remainder_indices[i].
    std::vector<std::size_t> remainder_indices;
};

/// Moves exactly `per_class` seeded-random samples of every class into the
/// server set; everything else is returned as the remainder.
ServerSplit build_server_set(const LabeledDataset& dataset, std::size_t per_class, std::uint64_t seed);

/// N x C matrix of per-client class counts.
std::vector<std::vector<std::size_t>> partition_stats(const Partition& partition,
                                                      const LabeledDataset& dataset);

/// Shannon entropy (nats) of each client's class distribution.
std::vector<double> client_label_entropy(const std::vector<std::vector<std::size_t>>& stats);

/// Writes one line per client: `<id>:<i0>,<i1>,...`. `index_map`, when
/// nonempty, translates partition indices (e.g. back to the source pool).
void write_partition_manifest(const Partition& partition, const std::filesystem::path& path,
                              std::span<const std::size_t> index_map = {});

} // namespace fedsim
