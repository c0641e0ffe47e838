#include "negpr/finite_diff.hpp"

#include <cmath>
#include <stdexcept>

namespace negpr {

Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
    Vec grad(x.size());
    Vec xp = x;
    for (size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = f(xp);
        xp[i] = xi - h;
        const double fm = f(xp);
        xp[i] = xi;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite function value");
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double grad_rel_err(const Vec& analytic, const Vec& numeric, double floor) {
    if (analytic.size() != numeric.size())
        throw std::invalid_argument("grad_rel_err: size mismatch");
    double diff2 = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i) {
        const double d = analytic[i] - numeric[i];
        diff2 += d * d;
    }
    const double na = norm2(analytic);
    const double nb = norm2(numeric);
    const double denom = std::max(na, nb);
    if (denom < floor) return 0.0;
    return std::sqrt(diff2) / denom;
}

}  // namespace negpr
