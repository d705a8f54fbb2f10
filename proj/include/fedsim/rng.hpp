#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace fedsim {

/// Mixes a list of integers into one 64-bit seed (splitmix64 finalizer chain).
/// Used to derive independent streams keyed by (seed, round, client, ...).
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> keys) noexcept;

/// Seeded generator with platform-independent transforms. std::mt19937_64's raw
/// output is fully specified, but the standard distributions are not, so every
/// distribution used by the simulator is implemented here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1); safe to take the log of.
    double uniform_open();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal (Box-Muller, no caching).
    double normal();
    /// log of a Gamma(shape, 1) draw; Marsaglia-Tsang with the u^(1/a) boost
    /// for shape < 1, kept in log space so tiny shapes do not underflow.
    double log_gamma_variate(double shape);
    double gamma(double shape);
    /// Dirichlet(alpha, ..., alpha) over `dims` categories.
    std::vector<double> dirichlet(std::size_t dims, double alpha);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace fedsim
