#include "negpr/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace negpr {

Vec softmax(const Vec& z) {
    if (z.empty()) throw std::invalid_argument("softmax: empty input");
    const double zmax = *std::max_element(z.begin(), z.end());
    Vec p(z.size());
    double sum = 0.0;
    for (size_t c = 0; c < z.size(); ++c) {
        p[c] = std::max(std::exp(z[c] - zmax), kProbFloor);
        sum += p[c];
    }
    const double cap = std::nextafter(1.0, 0.0);
    for (double& pc : p) pc = std::clamp(pc / sum, kProbFloor, cap);
    return p;
}

bool is_prob_vec(const Vec& p) {
    double sum = 0.0;
    for (double pc : p) {
        if (!(pc > 0.0 && pc < 1.0)) return false;
        sum += pc;
    }
    return std::abs(sum - 1.0) <= 1e-9;
}

Mat softmax_jacobian(const Vec& p) {
    const int c = static_cast<int>(p.size());
    Mat j(c, c);
    for (int r = 0; r < c; ++r)
        for (int k = 0; k < c; ++k) j(r, k) = p[r] * ((r == k ? 1.0 : 0.0) - p[k]);
    return j;
}

CrossEntropyResult cross_entropy(const Vec& p, int y) {
    if (y < 0 || y >= static_cast<int>(p.size()))
        throw std::out_of_range("cross_entropy: label out of range");
    CrossEntropyResult r;
    r.loss = -std::log(std::max(p[y], kProbFloor));
    r.grad_logits = p;
    r.grad_logits[y] -= 1.0;
    return r;
}

double kl_div(const Vec& p, const Vec& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_div: size mismatch");
    double acc = 0.0;
    for (size_t c = 0; c < p.size(); ++c)
        acc += p[c] * std::log(std::max(p[c], kProbFloor) / std::max(q[c], kProbFloor));
    return acc;
}

double cosine_sim(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_sim: size mismatch");
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace negpr
