#pragma once

#include <functional>

#include "negpr/mat.hpp"

namespace negpr {

/// Central-difference gradient of a scalar function. The verification
/// oracle for every hand-derived gradient in the project: it only ever
/// calls f, never the analytic backward paths it checks.
Vec finite_diff_grad(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5);

/// Norm-based relative error between two gradients:
/// |a - b| / max(|a|, |b|). Returns 0 when both norms are below floor.
double grad_rel_err(const Vec& analytic, const Vec& numeric, double floor = 1e-12);

}  // namespace negpr
