#pragma once

#include <cstddef>
#include <vector>

namespace negpr {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. All numeric state in the project
/// (node features, layer weights, logits batches) lives in these.
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

    Vec row_vec(int r) const { return Vec(row(r), row(r) + cols); }
    void set_row(int r, const Vec& v);

    size_t size() const { return a.size(); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Mat& o) const { return rows == o.rows && cols == o.cols && a == o.a; }
};

// y = M x
void matvec(const Mat& m, const double* x, double* y);
// y += M^T x
void matvec_t_add(const Mat& m, const double* x, double* y);
// M += alpha * x y^T  (outer product accumulate)
void outer_add(Mat& m, double alpha, const double* x, const double* y);

void axpy(double alpha, const Vec& x, Vec& y);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);

bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

/// Flatten a list of parameter blocks into one vector and back.
/// Used by the finite-difference harness and the optimizer state.
Vec flatten(const std::vector<Mat>& blocks);
void unflatten(const Vec& flat, std::vector<Mat>& blocks);
size_t total_size(const std::vector<Mat>& blocks);

}  // namespace negpr
