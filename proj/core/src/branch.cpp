#include "negpr/branch.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace negpr {

std::string to_string(BranchKind k) { return k == BranchKind::ib ? "ib" : "eb"; }

BranchKind branch_kind_from_string(const std::string& s) {
    if (s == "ib") return BranchKind::ib;
    if (s == "eb") return BranchKind::eb;
    throw std::invalid_argument("unknown branch kind: " + s);
}

namespace {

Mat he_mat(int rows, int cols, Rng& rng) {
    Mat m(rows, cols);
    const double scale = std::sqrt(2.0 / cols);
    for (double& x : m.a) x = scale * rng.normal();
    return m;
}

}  // namespace

BranchParams init_branch(const BranchConfig& cfg, Rng& rng) {
    if (cfg.feature_dim < 1 || cfg.hidden < 1 || cfg.classes < 2)
        throw std::invalid_argument("branch config: bad dimensions");
    BranchParams p;
    p.cfg = cfg;
    if (cfg.kind == BranchKind::ib) {
        if (cfg.layers < 1) throw std::invalid_argument("branch config: layers must be >= 1");
        int in = cfg.feature_dim;
        for (int l = 0; l < cfg.layers; ++l) {
            p.blocks.push_back(he_mat(cfg.hidden, 2 * in, rng));
            p.blocks.push_back(Mat(1, cfg.hidden));
            in = cfg.hidden;
        }
    } else {
        if (cfg.path_length < 1)
            throw std::invalid_argument("branch config: path_length must be >= 1");
        p.blocks.push_back(he_mat(cfg.hidden, cfg.feature_dim, rng));
        p.blocks.push_back(Mat(1, cfg.hidden));
    }
    p.blocks.push_back(he_mat(cfg.classes, cfg.hidden, rng));
    p.blocks.push_back(Mat(1, cfg.classes));
    return p;
}

std::vector<Mat> zero_grads(const BranchParams& p) {
    std::vector<Mat> g;
    g.reserve(p.blocks.size());
    for (const Mat& b : p.blocks) g.push_back(Mat(b.rows, b.cols));
    return g;
}

namespace {

void ib_forward(const GraphInstance& g, const BranchParams& p, ForwardCache& c) {
    const BranchConfig& cfg = p.cfg;
    const int n = g.num_nodes();
    const auto adj = g.adjacency();

    c.h.assign(cfg.layers + 1, Mat());
    c.agg.assign(cfg.layers, Mat());
    c.pre.assign(cfg.layers, Mat());
    c.h[0] = g.node_features;

    Vec cat;
    for (int l = 1; l <= cfg.layers; ++l) {
        const Mat& prev = c.h[l - 1];
        const int din = prev.cols;
        const Mat& W = p.blocks[2 * (l - 1)];
        const Mat& b = p.blocks[2 * (l - 1) + 1];

        Mat& agg = c.agg[l - 1];
        agg = Mat(n, din);
        for (int u = 0; u < n; ++u) {
            double* out = agg.row(u);
            for (int v : adj[u]) {
                const double* in = prev.row(v);
                for (int cdx = 0; cdx < din; ++cdx) out[cdx] += in[cdx];
            }
        }

        Mat& pre = c.pre[l - 1];
        pre = Mat(n, cfg.hidden);
        c.h[l] = Mat(n, cfg.hidden);
        cat.resize(2 * static_cast<size_t>(din));
        for (int u = 0; u < n; ++u) {
            std::memcpy(cat.data(), prev.row(u), sizeof(double) * din);
            std::memcpy(cat.data() + din, agg.row(u), sizeof(double) * din);
            double* pr = pre.row(u);
            matvec(W, cat.data(), pr);
            double* hr = c.h[l].row(u);
            for (int r = 0; r < cfg.hidden; ++r) {
                pr[r] += b(0, r);
                hr[r] = pr[r] > 0.0 ? pr[r] : 0.0;
            }
        }
    }

    c.z.assign(cfg.hidden, 0.0);
    const Mat& top = c.h[cfg.layers];
    for (int u = 0; u < n; ++u) {
        const double* hr = top.row(u);
        for (int r = 0; r < cfg.hidden; ++r) c.z[r] += hr[r];
    }
    for (double& x : c.z) x /= n;
}

void ib_backward(const GraphInstance& g, const BranchParams& p, const ForwardCache& c,
                 const Vec& dz, std::vector<Mat>& grads) {
    const BranchConfig& cfg = p.cfg;
    const int n = g.num_nodes();
    const auto adj = g.adjacency();

    Mat dh(n, cfg.hidden);
    for (int u = 0; u < n; ++u) {
        double* row = dh.row(u);
        for (int r = 0; r < cfg.hidden; ++r) row[r] = dz[r] / n;
    }

    Vec cat, dpre(cfg.hidden), dcat;
    for (int l = cfg.layers; l >= 1; --l) {
        const Mat& prev = c.h[l - 1];
        const Mat& agg = c.agg[l - 1];
        const Mat& pre = c.pre[l - 1];
        const Mat& W = p.blocks[2 * (l - 1)];
        Mat& dW = grads[2 * (l - 1)];
        Mat& db = grads[2 * (l - 1) + 1];
        const int din = prev.cols;

        cat.resize(2 * static_cast<size_t>(din));
        Mat dprev;
        if (l > 1) dprev = Mat(n, din);
        for (int u = 0; u < n; ++u) {
            const double* pr = pre.row(u);
            const double* dr = dh.row(u);
            for (int r = 0; r < cfg.hidden; ++r) dpre[r] = pr[r] > 0.0 ? dr[r] : 0.0;

            std::memcpy(cat.data(), prev.row(u), sizeof(double) * din);
            std::memcpy(cat.data() + din, agg.row(u), sizeof(double) * din);
            outer_add(dW, 1.0, dpre.data(), cat.data());
            for (int r = 0; r < cfg.hidden; ++r) db(0, r) += dpre[r];

            if (l > 1) {
                dcat.assign(2 * static_cast<size_t>(din), 0.0);
                matvec_t_add(W, dpre.data(), dcat.data());
                // self part goes to node u, aggregation part to its neighbors
                double* dp = dprev.row(u);
                for (int cdx = 0; cdx < din; ++cdx) dp[cdx] += dcat[cdx];
                const double* dagg = dcat.data() + din;
                for (int v : adj[u]) {
                    double* dn = dprev.row(v);
                    for (int cdx = 0; cdx < din; ++cdx) dn[cdx] += dagg[cdx];
                }
            }
        }
        if (l > 1) dh = std::move(dprev);
    }
}

void eb_forward(const GraphInstance& g, const PathData* paths, const BranchParams& p,
                ForwardCache& c) {
    if (paths == nullptr)
        throw std::invalid_argument("explicit branch forward needs precomputed paths");
    const BranchConfig& cfg = p.cfg;
    const int n = g.num_nodes();
    if (static_cast<int>(paths->mean_feats.size()) != n)
        throw std::invalid_argument("path data does not match graph");
    const Mat& Wphi = p.blocks[0];
    const Mat& bphi = p.blocks[1];

    c.phi_pre.assign(n, {});
    c.node_repr = Mat(n, cfg.hidden);
    c.z.assign(cfg.hidden, 0.0);
    Vec pre(cfg.hidden);
    for (int v = 0; v < n; ++v) {
        const auto& feats = paths->mean_feats[v];
        double* nr = c.node_repr.row(v);
        for (const Vec& mf : feats) {
            matvec(Wphi, mf.data(), pre.data());
            for (int r = 0; r < cfg.hidden; ++r) pre[r] += bphi(0, r);
            c.phi_pre[v].push_back(pre);
            for (int r = 0; r < cfg.hidden; ++r) nr[r] += pre[r] > 0.0 ? pre[r] : 0.0;
        }
        const double inv = 1.0 / static_cast<double>(feats.size());
        for (int r = 0; r < cfg.hidden; ++r) {
            nr[r] *= inv;
            c.z[r] += nr[r];
        }
    }
    for (double& x : c.z) x /= n;
}

void eb_backward(const PathData* paths, const BranchParams& p, const ForwardCache& c,
                 const Vec& dz, std::vector<Mat>& grads) {
    const BranchConfig& cfg = p.cfg;
    const int n = static_cast<int>(paths->mean_feats.size());
    Mat& dWphi = grads[0];
    Mat& dbphi = grads[1];

    Vec dpre(cfg.hidden);
    for (int v = 0; v < n; ++v) {
        const auto& feats = paths->mean_feats[v];
        const double scale = 1.0 / (static_cast<double>(n) * feats.size());
        for (size_t j = 0; j < feats.size(); ++j) {
            const Vec& pre = c.phi_pre[v][j];
            for (int r = 0; r < cfg.hidden; ++r)
                dpre[r] = pre[r] > 0.0 ? dz[r] * scale : 0.0;
            outer_add(dWphi, 1.0, dpre.data(), feats[j].data());
            for (int r = 0; r < cfg.hidden; ++r) dbphi(0, r) += dpre[r];
        }
    }
}

}  // namespace

GraphEmbedding branch_forward(const GraphInstance& g, const PathData* paths,
                              const BranchParams& p, ForwardCache* cache) {
    if (g.feature_dim() != p.cfg.feature_dim)
        throw std::invalid_argument("branch forward: feature dimension mismatch");
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    if (p.cfg.kind == BranchKind::ib)
        ib_forward(g, p, c);
    else
        eb_forward(g, paths, p, c);

    const Mat& Whead = p.blocks[p.blocks.size() - 2];
    const Mat& bhead = p.blocks[p.blocks.size() - 1];
    c.logits.assign(p.cfg.classes, 0.0);
    matvec(Whead, c.z.data(), c.logits.data());
    for (int r = 0; r < p.cfg.classes; ++r) c.logits[r] += bhead(0, r);
    return {c.z, c.logits};
}

void branch_backward(const GraphInstance& g, const PathData* paths, const BranchParams& p,
                     const ForwardCache& cache, const Vec& dlogits, std::vector<Mat>& grads) {
    if (static_cast<int>(dlogits.size()) != p.cfg.classes)
        throw std::invalid_argument("branch backward: dlogits size mismatch");
    const size_t hw = p.blocks.size() - 2;
    const Mat& Whead = p.blocks[hw];
    outer_add(grads[hw], 1.0, dlogits.data(), cache.z.data());
    for (int r = 0; r < p.cfg.classes; ++r) grads[hw + 1](0, r) += dlogits[r];

    Vec dz(p.cfg.hidden, 0.0);
    matvec_t_add(Whead, dlogits.data(), dz.data());
    if (p.cfg.kind == BranchKind::ib)
        ib_backward(g, p, cache, dz, grads);
    else
        eb_backward(paths, p, cache, dz, grads);
}

BatchOutput batch_forward(const DomainDataset& ds, const std::vector<int>& indices,
                          const std::vector<PathData>* paths, const BranchParams& p,
                          std::vector<ForwardCache>* caches) {
    const int n = static_cast<int>(indices.size());
    BatchOutput out;
    out.logits = Mat(n, p.cfg.classes);
    out.embeddings = Mat(n, p.cfg.hidden);
    if (caches) caches->assign(n, ForwardCache{});
    for (int i = 0; i < n; ++i) {
        const int gi = indices[i];
        const PathData* pd = paths ? &(*paths)[gi] : nullptr;
        ForwardCache* cache = caches ? &(*caches)[i] : nullptr;
        GraphEmbedding e = branch_forward(ds.graphs[gi], pd, p, cache);
        out.logits.set_row(i, e.logits);
        out.embeddings.set_row(i, e.embedding);
    }
    return out;
}

BatchOutput batch_forward(const DomainDataset& ds, const std::vector<PathData>* paths,
                          const BranchParams& p, std::vector<ForwardCache>* caches) {
    std::vector<int> idx(ds.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return batch_forward(ds, idx, paths, p, caches);
}

}  // namespace negpr
