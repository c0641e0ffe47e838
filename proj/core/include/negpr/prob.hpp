#pragma once

#include "negpr/mat.hpp"

namespace negpr {

/// Floor applied to probabilities before they enter a log or a division.
/// Keeps degenerate one-hot teachers finite.
inline constexpr double kProbFloor = 1e-300;

/// Max-shifted softmax. Output entries are strictly inside (0, 1) and sum
/// to 1 within 1e-9, for any finite input (entries at +-1e8 included).
Vec softmax(const Vec& z);

/// True iff entries are in (0,1) and sum to 1 within 1e-9.
bool is_prob_vec(const Vec& p);

/// J[c][k] = p_c (delta_ck - p_k). Rows sum to 0; the matrix is symmetric.
Mat softmax_jacobian(const Vec& p);

struct CrossEntropyResult {
    double loss;
    Vec grad_logits;  // p - onehot(y)
};
/// loss = -log p_y with the fused softmax gradient p - onehot(y).
CrossEntropyResult cross_entropy(const Vec& p, int y);

/// KL(p || q) = sum_c p_c log(p_c / q_c), q clamped at kProbFloor.
double kl_div(const Vec& p, const Vec& q);

/// dot(a,b) / (|a||b|); 0 when either norm is below 1e-12.
double cosine_sim(const Vec& a, const Vec& b);

}  // namespace negpr
