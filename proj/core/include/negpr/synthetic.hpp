#pragma once

#include <cstdint>
#include <utility>

#include "negpr/graph.hpp"

namespace negpr {

// Knobs for the synthetic generator; the defaults define the standard task.
struct SynthKnobs {
    double jitter = 0.10;  // stddev of Gaussian feature noise
};

// Binary two-domain graph classification task. Class 0 graphs are a cycle
// with pendant nodes, class 1 graphs are a star or a path with pendants; the
// classes share their size and pendant distributions and differ only in
// degree structure. Domain shift: source graphs have 8-14 nodes, target
// graphs 16-26. Node features are [1, deg==1, deg==2, deg>=3] plus Gaussian
// jitter. Target labels are kept for evaluation only. Deterministic given
// the seed.
std::pair<DomainDataset, DomainDataset> synth_two_domain(int n_source, int n_target,
                                                         std::uint64_t rng_seed,
                                                         const SynthKnobs& knobs = {});

}  // namespace negpr
