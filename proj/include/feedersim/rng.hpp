#ifndef FEEDERSIM_RNG_HPP
#define FEEDERSIM_RNG_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace feedersim {

/// Seedable random stream used by all stochastic generators.
///
/// Backed by std::mt19937_64, whose output sequence is fully specified by
/// the standard, so identically seeded streams produce identical draws on
/// every platform. Floating-point and integer draws below are built
/// directly on the raw 64-bit output (the standard library distributions
/// are implementation-defined and would break golden files).
///
/// Stream splitting: topology and load/PV placement use two independent
/// Rng instances, one seeded with topology_seed and one with load_seed,
/// so re-drawing loads never perturbs line impedances.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [lo, hi) with 53-bit resolution; returns lo
    /// exactly when lo == hi.
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    /// Unbiased uniform integer in [0, n), by rejection.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Fisher-Yates shuffle, high index down, partner drawn with
    /// uniform_index. The draw order is part of the reproducibility
    /// contract.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace feedersim

#endif
