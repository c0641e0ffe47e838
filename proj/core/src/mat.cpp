#include "negpr/mat.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace negpr {

void Mat::set_row(int r, const Vec& v) {
    assert(static_cast<int>(v.size()) == cols);
    double* dst = row(r);
    for (int c = 0; c < cols; ++c) dst[c] = v[c];
}

void matvec(const Mat& m, const double* x, double* y) {
    for (int r = 0; r < m.rows; ++r) {
        const double* mr = m.row(r);
        double acc = 0.0;
        for (int c = 0; c < m.cols; ++c) acc += mr[c] * x[c];
        y[r] = acc;
    }
}

void matvec_t_add(const Mat& m, const double* x, double* y) {
    for (int r = 0; r < m.rows; ++r) {
        const double* mr = m.row(r);
        const double xr = x[r];
        for (int c = 0; c < m.cols; ++c) y[c] += mr[c] * xr;
    }
}

void outer_add(Mat& m, double alpha, const double* x, const double* y) {
    for (int r = 0; r < m.rows; ++r) {
        double* mr = m.row(r);
        const double ax = alpha * x[r];
        for (int c = 0; c < m.cols; ++c) mr[c] += ax * y[c];
    }
}

void axpy(double alpha, const Vec& x, Vec& y) {
    assert(x.size() == y.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

bool all_finite(const Mat& m) { return all_finite(m.a); }

Vec flatten(const std::vector<Mat>& blocks) {
    Vec out;
    out.reserve(total_size(blocks));
    for (const Mat& b : blocks) out.insert(out.end(), b.a.begin(), b.a.end());
    return out;
}

void unflatten(const Vec& flat, std::vector<Mat>& blocks) {
    if (flat.size() != total_size(blocks))
        throw std::invalid_argument("unflatten: size mismatch");
    size_t off = 0;
    for (Mat& b : blocks) {
        for (size_t i = 0; i < b.a.size(); ++i) b.a[i] = flat[off + i];
        off += b.a.size();
    }
}

size_t total_size(const std::vector<Mat>& blocks) {
    size_t n = 0;
    for (const Mat& b : blocks) n += b.a.size();
    return n;
}

}  // namespace negpr
