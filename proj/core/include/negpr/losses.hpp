#pragma once

#include <map>
#include <string>
#include <vector>

#include "negpr/branch.hpp"
#include "negpr/mat.hpp"

namespace negpr {

// Top-k semantic neighbors per sample, by cosine similarity of embeddings.
struct NeighborGraph {
    int k = 1;
    std::vector<std::vector<int>> idx;  // k neighbor indices per row, self excluded
    std::vector<Vec> w;                 // nonneg weights, each row sums to 1
};

// Neighbors are the k rows j != i with the largest cosine similarity (ties go
// to the smaller index). Weights are the similarities clamped at 0 and
// renormalized; a row that clamps to all zeros falls back to uniform.
NeighborGraph build_neighbor_graph(const Mat& embeddings, int k);

// Row i of the result: sum_j w_ij softmax(logits_j).
std::vector<Vec> neighbor_mixture(const Mat& logits, const NeighborGraph& ng);

struct NoiseLossResult {
    double loss = 0.0;
    Mat grad_logits;
};

// Semantic-consistency loss: (1/n) sum_i KL(softmax(z_i) || mixture_i). The
// mixture rows are treated as constants (stop-gradient), so the returned
// gradient only flows through each sample's own logits.
NoiseLossResult noise_loss_frozen(const Mat& logits, const std::vector<Vec>& mixtures);
// Convenience: builds the mixture from these same logits, then freezes it.
NoiseLossResult noise_loss(const Mat& logits, const NeighborGraph& ng);

// One loss evaluation: scalar total, named components, and logit-space
// gradients (grad_target_logits is empty outside refinement).
// total = sup + beta*noise + pseudo_ce + lambda*tolerant_reg.
struct LossReport {
    double total = 0.0;
    std::map<std::string, double> components;  // sup, noise, pseudo_ce, tolerant_reg
    Mat grad_logits;
    Mat grad_target_logits;
};

// Supervised CE on (noisy) labels plus beta times the semantic-consistency
// loss, both averaged over the batch.
LossReport pretrain_loss(const Mat& logits, const std::vector<int>& labels,
                         const NeighborGraph& ng, double beta);

struct TolerantRegResult {
    double loss = 0.0;
    Vec grad_logits;
};

// Agreement regularizer -log<p, q> with teacher q constant. The gradient wrt
// the student logits is p_c * (<p,q> - q_c) / <p,q> — the sign validated by
// finite differences.
TolerantRegResult tolerant_reg(const Vec& p, const Vec& q);

// Per-sample logit gradient of CE(p, y_tilde) + lambda * (-log<p,q>):
// (p - onehot(y_tilde)) + lambda * tolerant_reg grad.
Vec lemma1_gradient(const Vec& p, const Vec& q, int y_tilde, double lambda);

// Confidence-filtered target samples with their teacher outputs.
struct PseudoLabelSet {
    std::vector<int> indices;  // into the target dataset
    std::vector<int> labels;   // argmax of the q rows
    Vec confidence;            // max of the q rows
    std::vector<Vec> q;        // full teacher softmax rows
    BranchKind teacher = BranchKind::ib;

    int size() const { return static_cast<int>(indices.size()); }
};

// Full fine-tuning objective: pretrain loss on the source batch plus the
// mean pseudo-label CE and agreement regularizer over the confident target
// samples. target_logits rows follow pl.indices order; with pl empty the
// target term vanishes and the report equals pretrain_loss.
LossReport refine_loss(const Mat& source_logits, const std::vector<int>& source_labels,
                       const NeighborGraph& ng, const Mat& target_logits,
                       const PseudoLabelSet& pl, double beta, double lambda);

}  // namespace negpr
