#include "negpr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "negpr/rng.hpp"

namespace negpr {
namespace {

constexpr int kFeatureDim = 4;

GraphInstance make_graph(int label, bool target_domain, const SynthKnobs& knobs, Rng& rng) {
    // Class 0 is a cycle with pendant nodes; class 1 is either a star or a
    // path with pendants. Both classes draw sizes and pendant fractions from
    // the same ranges. Stars are unmistakable at any size (almost every node
    // is a leaf) and pure cycles likewise (no leaves at all), so each class
    // keeps easy representatives under the shift. The contested region is
    // pendant-heavy cycle versus pendant-heavy path, where the deciding
    // evidence is the pair of path endpoints, a signal two nodes wide that
    // thins as graphs grow. The domain shift is the size range alone.
    const int n = static_cast<int>(target_domain ? 16 + rng.uniform_int(11)
                                                 : 8 + rng.uniform_int(7));
    GraphInstance g;
    g.label = label;
    g.edges.reserve(n);
    if (label == 1 && rng.uniform() < 0.5) {
        for (int i = 1; i < n; ++i) g.edges.push_back({0, i});  // star
    } else {
        const double pendant_frac = rng.uniform(0.0, 0.35);
        const int t = static_cast<int>(std::lround(n * pendant_frac));
        const int m = n - t;  // backbone length, >= 5
        for (int i = 0; i + 1 < m; ++i) g.edges.push_back({i, i + 1});
        if (label == 0) g.edges.push_back({0, m - 1});  // close the cycle
        const std::vector<size_t> attach = rng.sample_without_replacement(m, t);
        for (int j = 0; j < t; ++j)
            g.edges.push_back({static_cast<int>(attach[j]), m + j});
    }
    for (auto& [u, v] : g.edges)
        if (u > v) std::swap(u, v);
    std::sort(g.edges.begin(), g.edges.end());

    std::vector<int> degree(n, 0);
    for (const auto& [u, v] : g.edges) {
        ++degree[u];
        ++degree[v];
    }
    g.node_features = Mat(n, kFeatureDim);
    for (int u = 0; u < n; ++u) {
        g.node_features(u, 0) = 1.0;
        g.node_features(u, 1) = degree[u] == 1 ? 1.0 : 0.0;
        g.node_features(u, 2) = degree[u] == 2 ? 1.0 : 0.0;
        g.node_features(u, 3) = degree[u] >= 3 ? 1.0 : 0.0;
        for (int c = 0; c < kFeatureDim; ++c)
            g.node_features(u, c) += knobs.jitter * rng.normal();
    }
    return g;
}

DomainDataset make_domain(int count, bool target_domain, const SynthKnobs& knobs, Rng& rng) {
    DomainDataset ds;
    ds.num_classes = 2;
    ds.domain_tag = target_domain ? DomainTag::target : DomainTag::source;
    ds.name = target_domain ? "synthetic_target" : "synthetic_source";
    ds.graphs.reserve(count);
    for (int i = 0; i < count; ++i) ds.graphs.push_back(make_graph(i % 2, target_domain, knobs, rng));
    return ds;
}

}  // namespace

std::pair<DomainDataset, DomainDataset> synth_two_domain(int n_source, int n_target,
                                                         std::uint64_t rng_seed,
                                                         const SynthKnobs& knobs) {
    if (n_source < 10 || n_target < 10)
        throw std::invalid_argument("synth_two_domain: need at least 10 graphs per domain");
    Rng src_rng(derive_seed(rng_seed, 0x736e));
    Rng tgt_rng(derive_seed(rng_seed, 0x746e));
    return {make_domain(n_source, false, knobs, src_rng),
            make_domain(n_target, true, knobs, tgt_rng)};
}

}  // namespace negpr
