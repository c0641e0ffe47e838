#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace negpr {

/// mt19937_64 wrapper with hand-rolled draw routines so streams do not
/// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Uniform integer in [0, n). n must be > 0.
    uint64_t uniform_int(uint64_t n);

    /// Uniform double in [0, 1).
    double uniform();

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, spare cached).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_int(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// First m entries of a random permutation of [0, n).
    std::vector<size_t> sample_without_replacement(size_t n, size_t m);

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Mix a base seed with a stream tag into an independent child seed
/// (splitmix64 finalizer).
uint64_t derive_seed(uint64_t base, uint64_t stream);

}  // namespace negpr
