#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "negpr/finite_diff.hpp"
#include "negpr/losses.hpp"
#include "negpr/prob.hpp"
#include "negpr/refinement.hpp"
#include "negpr/rng.hpp"

using namespace negpr;

namespace {

Mat random_mat(int r, int c, Rng& rng, double scale = 1.0) {
    Mat m(r, c);
    for (auto& v : m.a) v = scale * rng.normal();
    return m;
}

// O(n^2) reference: rank all other rows by cosine similarity, ties to the
// smaller index, keep k.
std::vector<int> brute_force_topk(const Mat& emb, int i, int k) {
    std::vector<std::pair<double, int>> scored;
    for (int j = 0; j < emb.rows; ++j) {
        if (j == i) continue;
        scored.push_back({cosine_sim(emb.row_vec(i), emb.row_vec(j)), j});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    for (int t = 0; t < k && t < static_cast<int>(scored.size()); ++t)
        out.push_back(scored[t].second);
    return out;
}

}  // namespace

TEST_CASE("neighbor graph matches the brute-force ranking") {
    Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 6 + static_cast<int>(rng.uniform_int(20));
        const int k = 1 + static_cast<int>(rng.uniform_int(4));
        Mat emb = random_mat(n, 5, rng);
        NeighborGraph ng = build_neighbor_graph(emb, k);
        REQUIRE(static_cast<int>(ng.idx.size()) == n);
        CHECK(ng.k == k);
        for (int i = 0; i < n; ++i) {
            CHECK(ng.idx[i] == brute_force_topk(emb, i, k));
            double sum = 0.0;
            for (double w : ng.w[i]) {
                CHECK(w >= 0.0);
                sum += w;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("neighbor weights renormalize clamped similarities, uniform on all-negative rows") {
    // Row 0 is opposite to everything else: all its similarities clamp to 0
    // and the fallback must be uniform.
    Mat emb(4, 2);
    emb.set_row(0, {-1.0, 0.0});
    emb.set_row(1, {1.0, 0.0});
    emb.set_row(2, {1.0, 0.1});
    emb.set_row(3, {0.9, 0.2});
    NeighborGraph ng = build_neighbor_graph(emb, 2);
    for (double w : ng.w[0]) CHECK(w == doctest::Approx(0.5));

    // Row 1's neighbors are the two most aligned rows with positive weights
    // proportional to their similarities.
    double s12 = cosine_sim(emb.row_vec(1), emb.row_vec(2));
    double s13 = cosine_sim(emb.row_vec(1), emb.row_vec(3));
    CHECK(ng.idx[1] == std::vector<int>{2, 3});
    CHECK(ng.w[1][0] == doctest::Approx(s12 / (s12 + s13)).epsilon(1e-12));
}

TEST_CASE("neighbor mixture is the weighted average of neighbor softmaxes") {
    Rng rng(102);
    Mat logits = random_mat(5, 3, rng);
    Mat emb = random_mat(5, 4, rng);
    NeighborGraph ng = build_neighbor_graph(emb, 2);
    auto mix = neighbor_mixture(logits, ng);
    REQUIRE(mix.size() == 5);
    for (int i = 0; i < 5; ++i) {
        Vec want(3, 0.0);
        for (int t = 0; t < 2; ++t) {
            Vec pj = softmax(logits.row_vec(ng.idx[i][t]));
            axpy(ng.w[i][t], pj, want);
        }
        for (int c = 0; c < 3; ++c) CHECK(mix[i][c] == doctest::Approx(want[c]).epsilon(1e-12));
    }
}

TEST_CASE("frozen consistency loss equals mean KL and its gradient passes finite differences") {
    Rng rng(103);
    const int n = 4, c = 3;
    Mat logits = random_mat(n, c, rng);
    std::vector<Vec> mixtures;
    for (int i = 0; i < n; ++i) {
        Vec m = softmax(random_mat(1, c, rng).row_vec(0));
        mixtures.push_back(m);
    }

    NoiseLossResult res = noise_loss_frozen(logits, mixtures);
    double want = 0.0;
    for (int i = 0; i < n; ++i) want += kl_div(softmax(logits.row_vec(i)), mixtures[i]);
    CHECK(res.loss == doctest::Approx(want / n).epsilon(1e-12));

    auto f = [&](const Vec& flat) {
        Mat z(n, c);
        z.a = flat;
        return noise_loss_frozen(z, mixtures).loss;
    };
    Vec numeric = finite_diff_grad(f, logits.a);
    CHECK(grad_rel_err(res.grad_logits.a, numeric) < 1e-7);
}

TEST_CASE("noise_loss convenience freezes the mixture built from its own logits") {
    Rng rng(104);
    Mat logits = random_mat(6, 4, rng);
    Mat emb = random_mat(6, 3, rng);
    NeighborGraph ng = build_neighbor_graph(emb, 2);
    NoiseLossResult a = noise_loss(logits, ng);
    NoiseLossResult b = noise_loss_frozen(logits, neighbor_mixture(logits, ng));
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-14));
    for (size_t i = 0; i < a.grad_logits.size(); ++i)
        CHECK(a.grad_logits.a[i] == doctest::Approx(b.grad_logits.a[i]).epsilon(1e-14));
}

TEST_CASE("pretrain loss composes supervised CE and weighted consistency") {
    Rng rng(105);
    const int n = 5, c = 3;
    Mat logits = random_mat(n, c, rng);
    Mat emb = random_mat(n, 4, rng);
    std::vector<int> labels = {0, 2, 1, 1, 0};
    NeighborGraph ng = build_neighbor_graph(emb, 2);
    const double beta = 0.7;

    LossReport rep = pretrain_loss(logits, labels, ng, beta);
    double sup = 0.0;
    for (int i = 0; i < n; ++i) sup += cross_entropy(softmax(logits.row_vec(i)), labels[i]).loss;
    sup /= n;
    CHECK(rep.components.at("sup") == doctest::Approx(sup).epsilon(1e-12));
    CHECK(rep.total ==
          doctest::Approx(sup + beta * rep.components.at("noise")).epsilon(1e-12));

    auto f = [&](const Vec& flat) {
        Mat z(n, c);
        z.a = flat;
        // The mixture is held at the evaluation point, matching the
        // stop-gradient the analytic path implements.
        return pretrain_loss(z, labels, ng, beta).components.at("sup") +
               beta * noise_loss_frozen(z, neighbor_mixture(logits, ng)).loss;
    };
    Vec numeric = finite_diff_grad(f, logits.a);
    CHECK(grad_rel_err(rep.grad_logits.a, numeric) < 1e-7);
}

TEST_CASE("agreement regularizer value and gradient") {
    Vec p = {0.6, 0.3, 0.1};
    Vec q = {0.5, 0.4, 0.1};
    TolerantRegResult r = tolerant_reg(p, q);
    const double inner = 0.6 * 0.5 + 0.3 * 0.4 + 0.1 * 0.1;
    CHECK(r.loss == doctest::Approx(-std::log(inner)).epsilon(1e-12));
    for (int c = 0; c < 3; ++c)
        CHECK(r.grad_logits[c] == doctest::Approx(p[c] * (inner - q[c]) / inner).epsilon(1e-12));

    // Against finite differences of -log<softmax(z), q> in logit space.
    Rng rng(106);
    for (int trial = 0; trial < 25; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_int(5));
        Vec z(c), zq(c);
        for (auto& v : z) v = rng.uniform(-3.0, 3.0);
        for (auto& v : zq) v = rng.uniform(-3.0, 3.0);
        Vec qq = softmax(zq);
        TolerantRegResult rr = tolerant_reg(softmax(z), qq);
        auto f = [&](const Vec& zz) {
            Vec pp = softmax(zz);
            double inner2 = dot(pp, qq);
            return -std::log(inner2);
        };
        Vec numeric = finite_diff_grad(f, z);
        CHECK(grad_rel_err(rr.grad_logits, numeric) < 1e-6);
    }
}

TEST_CASE("regularizer gradient sums to zero and damps the teacher's class") {
    // g_c = p_c(<p,q> - q_c)/<p,q> sums to zero over classes, and is never
    // positive at argmax q because <p,q> <= max_c q_c. With the cross-entropy
    // term pushing away from a wrong pseudo-label, the combined update at the
    // teacher-preferred class can only shrink.
    Rng rng(107);
    for (int trial = 0; trial < 200; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_int(5));
        Vec p = softmax(random_mat(1, c, rng, 2.0).row_vec(0));
        Vec q = softmax(random_mat(1, c, rng, 2.0).row_vec(0));
        int cstar = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());

        TolerantRegResult r = tolerant_reg(p, q);
        CHECK(std::abs(std::accumulate(r.grad_logits.begin(), r.grad_logits.end(), 0.0)) < 1e-12);
        CHECK(r.grad_logits[cstar] <= 1e-15);

        int y_wrong = (cstar + 1) % c;
        Vec ce = cross_entropy(p, y_wrong).grad_logits;
        Vec combined = lemma1_gradient(p, q, y_wrong, 0.5);
        CHECK(combined[cstar] <= ce[cstar] + 1e-15);
    }
}

TEST_CASE("lemma1_gradient is the sum of its documented parts") {
    Rng rng(108);
    for (int trial = 0; trial < 50; ++trial) {
        const int c = 2 + static_cast<int>(rng.uniform_int(5));
        Vec p = softmax(random_mat(1, c, rng).row_vec(0));
        Vec q = softmax(random_mat(1, c, rng).row_vec(0));
        int y = static_cast<int>(rng.uniform_int(c));
        const double lambda = rng.uniform(0.0, 2.0);
        Vec got = lemma1_gradient(p, q, y, lambda);
        Vec ce = cross_entropy(p, y).grad_logits;
        Vec reg = tolerant_reg(p, q).grad_logits;
        for (int i = 0; i < c; ++i)
            CHECK(got[i] == doctest::Approx(ce[i] + lambda * reg[i]).epsilon(1e-12));
    }
}

TEST_CASE("confidence filter honors the threshold with argmax ties to the smaller class") {
    Mat probs(5, 3);
    probs.set_row(0, {0.8, 0.1, 0.1});
    probs.set_row(1, {0.2, 0.45, 0.35});
    probs.set_row(2, {0.45, 0.45, 0.10});
    probs.set_row(3, {0.1, 0.1, 0.8});
    probs.set_row(4, {1.0 / 3, 1.0 / 3, 1.0 / 3});

    PseudoLabelSet pl = filter_confident_probs(probs, 0.45, BranchKind::eb);
    CHECK(pl.teacher == BranchKind::eb);
    REQUIRE(pl.indices == std::vector<int>{0, 1, 2, 3});
    CHECK(pl.labels == std::vector<int>{0, 1, 0, 2});  // row 2 tie -> class 0
    CHECK(pl.confidence[1] == doctest::Approx(0.45));
    CHECK(pl.q[3][2] == doctest::Approx(0.8));

    CHECK(filter_confident_probs(probs, 0.0, BranchKind::ib).size() == 5);
    CHECK(filter_confident_probs(probs, 1.01, BranchKind::ib).size() == 0);
}

TEST_CASE("confidence filter nests monotonically over 1000 random rows") {
    Rng rng(109);
    Mat probs(1000, 4);
    for (int i = 0; i < probs.rows; ++i)
        probs.set_row(i, softmax(random_mat(1, 4, rng, 2.0).row_vec(0)));

    std::vector<double> zetas = {0.0, 0.3, 0.5, 0.7, 0.9, 1.01};
    std::vector<PseudoLabelSet> sets;
    for (double z : zetas) sets.push_back(filter_confident_probs(probs, z, BranchKind::ib));

    CHECK(sets.front().size() == 1000);
    CHECK(sets.back().size() == 0);
    for (size_t t = 0; t + 1 < sets.size(); ++t) {
        // Every index selected at the stricter threshold appears at the looser one.
        std::vector<int> strict = sets[t + 1].indices, loose = sets[t].indices;
        CHECK(std::includes(loose.begin(), loose.end(), strict.begin(), strict.end()));
    }
    for (int t = 0; t < sets[3].size(); ++t) {
        int i = sets[3].indices[t];
        double mx = *std::max_element(probs.row(i), probs.row(i) + 4);
        CHECK(mx >= 0.7);
        CHECK(sets[3].confidence[t] == doctest::Approx(mx));
    }
}

TEST_CASE("refine loss reduces to the pretrain loss when no sample is confident") {
    Rng rng(110);
    Mat logits = random_mat(6, 2, rng);
    Mat emb = random_mat(6, 3, rng);
    std::vector<int> labels = {0, 1, 0, 1, 0, 1};
    NeighborGraph ng = build_neighbor_graph(emb, 2);

    PseudoLabelSet empty;
    LossReport with_empty = refine_loss(logits, labels, ng, Mat(0, 2), empty, 0.5, 0.5);
    LossReport plain = pretrain_loss(logits, labels, ng, 0.5);
    CHECK(with_empty.total == doctest::Approx(plain.total).epsilon(1e-14));
    CHECK(with_empty.components.at("pseudo_ce") == doctest::Approx(0.0));
    CHECK(with_empty.components.at("tolerant_reg") == doctest::Approx(0.0));
    CHECK(with_empty.grad_target_logits.size() == 0);
}

TEST_CASE("refine loss adds mean pseudo CE and regularizer over the confident set") {
    Rng rng(111);
    const int ns = 6, nt = 4, c = 3;
    Mat src_logits = random_mat(ns, c, rng);
    Mat emb = random_mat(ns, 4, rng);
    std::vector<int> src_labels = {0, 1, 2, 0, 1, 2};
    NeighborGraph ng = build_neighbor_graph(emb, 2);

    PseudoLabelSet pl;
    pl.teacher = BranchKind::ib;
    for (int t = 0; t < nt; ++t) {
        pl.indices.push_back(10 + t);
        Vec q = softmax(random_mat(1, c, rng, 2.0).row_vec(0));
        int y = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
        pl.labels.push_back(y);
        pl.confidence.push_back(q[y]);
        pl.q.push_back(q);
    }
    Mat tgt_logits = random_mat(nt, c, rng);

    const double beta = 0.5, lambda = 0.8;
    LossReport rep = refine_loss(src_logits, src_labels, ng, tgt_logits, pl, beta, lambda);

    double pseudo = 0.0, reg = 0.0;
    for (int t = 0; t < nt; ++t) {
        Vec p = softmax(tgt_logits.row_vec(t));
        pseudo += cross_entropy(p, pl.labels[t]).loss;
        reg += tolerant_reg(p, pl.q[t]).loss;
    }
    pseudo /= nt;
    reg /= nt;
    LossReport pre = pretrain_loss(src_logits, src_labels, ng, beta);
    CHECK(rep.components.at("pseudo_ce") == doctest::Approx(pseudo).epsilon(1e-12));
    CHECK(rep.components.at("tolerant_reg") == doctest::Approx(reg).epsilon(1e-12));
    CHECK(rep.total == doctest::Approx(pre.total + pseudo + lambda * reg).epsilon(1e-12));

    // Target-logit gradient against finite differences (teacher held fixed).
    auto f = [&](const Vec& flat) {
        Mat z(nt, c);
        z.a = flat;
        return refine_loss(src_logits, src_labels, ng, z, pl, beta, lambda).total;
    };
    Vec numeric = finite_diff_grad(f, tgt_logits.a);
    CHECK(grad_rel_err(rep.grad_target_logits.a, numeric) < 1e-7);

    // Source-logit gradient is untouched by the target term.
    for (size_t i = 0; i < rep.grad_logits.size(); ++i)
        CHECK(rep.grad_logits.a[i] == doctest::Approx(pre.grad_logits.a[i]).epsilon(1e-14));
}
