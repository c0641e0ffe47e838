#include "negpr/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "negpr/prob.hpp"

namespace negpr {

NeighborGraph build_neighbor_graph(const Mat& embeddings, int k) {
    const int n = embeddings.rows;
    const int d = embeddings.cols;
    if (k < 1) throw std::invalid_argument("neighbor graph: k must be >= 1");
    if (n <= k) throw std::invalid_argument("neighbor graph: need more samples than k");

    Vec norm(n);
    for (int i = 0; i < n; ++i) {
        const double* r = embeddings.row(i);
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += r[c] * r[c];
        norm[i] = std::sqrt(s);
    }

    NeighborGraph ng;
    ng.k = k;
    ng.idx.resize(n);
    ng.w.resize(n);
    std::vector<std::pair<double, int>> sims(n);
    for (int i = 0; i < n; ++i) {
        const double* ri = embeddings.row(i);
        for (int j = 0; j < n; ++j) {
            double sim = 0.0;
            if (j != i && norm[i] >= 1e-12 && norm[j] >= 1e-12) {
                const double* rj = embeddings.row(j);
                double dp = 0.0;
                for (int c = 0; c < d; ++c) dp += ri[c] * rj[c];
                sim = dp / (norm[i] * norm[j]);
            }
            sims[j] = {sim, j};
        }
        sims[i].first = -2.0;  // below any cosine, so self is never picked
        std::partial_sort(sims.begin(), sims.begin() + k, sims.end(),
                          [](const auto& a, const auto& b) {
                              return a.first > b.first ||
                                     (a.first == b.first && a.second < b.second);
                          });
        ng.idx[i].resize(k);
        ng.w[i].resize(k);
        double sum = 0.0;
        for (int t = 0; t < k; ++t) {
            ng.idx[i][t] = sims[t].second;
            ng.w[i][t] = std::max(0.0, sims[t].first);
            sum += ng.w[i][t];
        }
        if (sum > 0.0)
            for (double& w : ng.w[i]) w /= sum;
        else
            for (double& w : ng.w[i]) w = 1.0 / k;
    }
    return ng;
}

std::vector<Vec> neighbor_mixture(const Mat& logits, const NeighborGraph& ng) {
    const int n = logits.rows;
    if (static_cast<int>(ng.idx.size()) != n)
        throw std::invalid_argument("neighbor mixture: graph size mismatch");
    std::vector<Vec> probs(n);
    for (int i = 0; i < n; ++i) probs[i] = softmax(logits.row_vec(i));
    std::vector<Vec> mix(n);
    for (int i = 0; i < n; ++i) {
        mix[i].assign(logits.cols, 0.0);
        for (int t = 0; t < ng.k; ++t) axpy(ng.w[i][t], probs[ng.idx[i][t]], mix[i]);
    }
    return mix;
}

NoiseLossResult noise_loss_frozen(const Mat& logits, const std::vector<Vec>& mixtures) {
    const int n = logits.rows;
    const int C = logits.cols;
    if (static_cast<int>(mixtures.size()) != n)
        throw std::invalid_argument("noise loss: mixture size mismatch");
    NoiseLossResult out;
    out.grad_logits = Mat(n, C);
    for (int i = 0; i < n; ++i) {
        const Vec p = softmax(logits.row_vec(i));
        const double kl = kl_div(p, mixtures[i]);
        out.loss += kl / n;
        // d/dz KL(softmax(z) || m) with m frozen = p ⊙ (log(p/m) − KL)
        double* g = out.grad_logits.row(i);
        for (int c = 0; c < C; ++c) {
            const double lr = std::log(p[c]) - std::log(std::max(mixtures[i][c], kProbFloor));
            g[c] = p[c] * (lr - kl) / n;
        }
    }
    return out;
}

NoiseLossResult noise_loss(const Mat& logits, const NeighborGraph& ng) {
    return noise_loss_frozen(logits, neighbor_mixture(logits, ng));
}

LossReport pretrain_loss(const Mat& logits, const std::vector<int>& labels,
                         const NeighborGraph& ng, double beta) {
    const int n = logits.rows;
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("pretrain loss: label count mismatch");
    LossReport rep;
    rep.grad_logits = Mat(n, logits.cols);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) {
        const CrossEntropyResult ce = cross_entropy(softmax(logits.row_vec(i)), labels[i]);
        sup += ce.loss / n;
        double* g = rep.grad_logits.row(i);
        for (int c = 0; c < logits.cols; ++c) g[c] += ce.grad_logits[c] / n;
    }
    double noise = 0.0;
    if (beta != 0.0) {
        const NoiseLossResult nl = noise_loss(logits, ng);
        noise = nl.loss;
        for (size_t t = 0; t < rep.grad_logits.a.size(); ++t)
            rep.grad_logits.a[t] += beta * nl.grad_logits.a[t];
    }
    rep.components = {{"sup", sup}, {"noise", noise}, {"pseudo_ce", 0.0}, {"tolerant_reg", 0.0}};
    rep.total = sup + beta * noise;
    return rep;
}

TolerantRegResult tolerant_reg(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw std::invalid_argument("tolerant reg: size mismatch");
    const double s = std::max(dot(p, q), kProbFloor);
    TolerantRegResult out;
    out.loss = -std::log(s);
    out.grad_logits.resize(p.size());
    for (size_t c = 0; c < p.size(); ++c) out.grad_logits[c] = p[c] * (s - q[c]) / s;
    return out;
}

Vec lemma1_gradient(const Vec& p, const Vec& q, int y_tilde, double lambda) {
    if (y_tilde < 0 || y_tilde >= static_cast<int>(p.size()))
        throw std::out_of_range("lemma1 gradient: label out of range");
    Vec grad = p;
    grad[y_tilde] -= 1.0;
    if (lambda != 0.0) axpy(lambda, tolerant_reg(p, q).grad_logits, grad);
    return grad;
}

LossReport refine_loss(const Mat& source_logits, const std::vector<int>& source_labels,
                       const NeighborGraph& ng, const Mat& target_logits,
                       const PseudoLabelSet& pl, double beta, double lambda) {
    LossReport rep = pretrain_loss(source_logits, source_labels, ng, beta);
    const int T = pl.size();
    rep.grad_target_logits = Mat(T, source_logits.cols);
    if (T == 0) return rep;
    if (target_logits.rows != T)
        throw std::invalid_argument("refine loss: target logits do not match pseudo-label set");

    double pseudo_ce = 0.0, reg = 0.0;
    for (int j = 0; j < T; ++j) {
        const Vec p = softmax(target_logits.row_vec(j));
        pseudo_ce += cross_entropy(p, pl.labels[j]).loss / T;
        reg += tolerant_reg(p, pl.q[j]).loss / T;
        const Vec g = lemma1_gradient(p, pl.q[j], pl.labels[j], lambda);
        for (int c = 0; c < target_logits.cols; ++c) rep.grad_target_logits(j, c) = g[c] / T;
    }
    rep.components["pseudo_ce"] = pseudo_ce;
    rep.components["tolerant_reg"] = reg;
    rep.total += pseudo_ce + lambda * reg;
    return rep;
}

}  // namespace negpr
