#pragma once

#include <string>
#include <vector>

#include "negpr/graph.hpp"
#include "negpr/mat.hpp"
#include "negpr/paths.hpp"
#include "negpr/rng.hpp"

namespace negpr {

enum class BranchKind { ib, eb };

std::string to_string(BranchKind k);
BranchKind branch_kind_from_string(const std::string& s);

struct BranchConfig {
    BranchKind kind = BranchKind::ib;
    int feature_dim = 1;
    int hidden = 32;
    int layers = 2;       // message-passing depth (implicit branch only)
    int classes = 2;
    int path_length = 3;  // max shortest-path length (explicit branch only)

    bool operator==(const BranchConfig&) const = default;
};

// Trainable parameters, stored as a flat block list so the optimizer and the
// finite-difference harness can treat both branches uniformly. Biases are
// 1 x n matrices. Layout:
//   implicit: [W_1 (h x 2d), b_1, W_2 (h x 2h), b_2, ..., W_L, b_L,
//              W_head (C x h), b_head (1 x C)]
//   explicit: [W_phi (h x d), b_phi, W_head (C x h), b_head (1 x C)]
struct BranchParams {
    BranchConfig cfg;
    std::vector<Mat> blocks;

    bool operator==(const BranchParams&) const = default;
};

// He-scaled Gaussian weights, zero biases; deterministic given the rng state.
BranchParams init_branch(const BranchConfig& cfg, Rng& rng);

std::vector<Mat> zero_grads(const BranchParams& p);

struct GraphEmbedding {
    Vec embedding;  // z_G, length hidden
    Vec logits;     // length classes
};

// Everything the backward pass needs from a forward pass of one graph.
struct ForwardCache {
    // implicit branch: h[0] is the input features, h[l] the post-ReLU states;
    // agg[l-1] and pre[l-1] are the neighbor sums and pre-activations of
    // layer l.
    std::vector<Mat> h;
    std::vector<Mat> agg;
    std::vector<Mat> pre;
    // explicit branch: phi_pre[v][j] is the pre-activation of path j starting
    // at node v; node_repr holds the per-node means of ReLU(phi_pre).
    std::vector<std::vector<Vec>> phi_pre;
    Mat node_repr;
    // shared
    Vec z;
    Vec logits;
};

// Forward pass of one graph. `paths` is required for the explicit branch and
// ignored by the implicit one. Pass a cache to enable branch_backward.
GraphEmbedding branch_forward(const GraphInstance& g, const PathData* paths,
                              const BranchParams& p, ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(blocks) into `grads` given d(loss)/d(logits).
void branch_backward(const GraphInstance& g, const PathData* paths, const BranchParams& p,
                     const ForwardCache& cache, const Vec& dlogits, std::vector<Mat>& grads);

struct BatchOutput {
    Mat logits;      // one row per graph
    Mat embeddings;  // one row per graph
};

// Row i is the forward of ds.graphs[indices[i]]. `paths` (when given) is
// indexed by the *dataset* position, not the slice position.
BatchOutput batch_forward(const DomainDataset& ds, const std::vector<int>& indices,
                          const std::vector<PathData>* paths, const BranchParams& p,
                          std::vector<ForwardCache>* caches = nullptr);
BatchOutput batch_forward(const DomainDataset& ds, const std::vector<PathData>* paths,
                          const BranchParams& p, std::vector<ForwardCache>* caches = nullptr);

}  // namespace negpr
