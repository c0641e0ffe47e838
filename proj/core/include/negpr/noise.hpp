#pragma once

#include <cstdint>
#include <vector>

#include "negpr/graph.hpp"

namespace negpr {

struct NoiseRecord {
    std::vector<int> original_labels;
    std::vector<int> noisy_labels;
    std::vector<bool> flip_mask;  // true iff noisy != original
    double noise_ratio = 0.0;

    int num_flipped() const;
};

// Symmetric uniform label corruption: picks exactly round(ratio * n) indices
// without replacement and replaces each chosen label with a uniformly random
// *different* class. Deterministic given the seed.
NoiseRecord inject_label_noise(const std::vector<int>& labels, double ratio, int num_classes,
                               std::uint64_t seed);

// Convenience: corrupts ds.graphs[i].label in place, same contract.
NoiseRecord inject_label_noise(DomainDataset& ds, double ratio, std::uint64_t seed);

}  // namespace negpr
