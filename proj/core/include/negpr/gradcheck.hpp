#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace negpr {

struct GradcheckOptions {
    int trials = 100;
    std::uint64_t seed = 7;
    // Test hook: negates the agreement-regularizer gradient before comparing,
    // to prove the finite-difference oracle catches a sign error.
    bool flip_tolerant_sign = false;
};

struct CheckResult {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct GradcheckReport {
    std::vector<CheckResult> checks;
    bool all_pass = true;
};

// Verifies every hand-derived gradient against central finite differences:
// the softmax Jacobian, fused cross-entropy, the agreement regularizer (sign
// included), the per-sample refinement gradient, the frozen-mixture
// consistency loss, and all training objectives chained through both branch
// architectures down to their parameters.
GradcheckReport run_gradcheck(const GradcheckOptions& opt = {});

void print_report(const GradcheckReport& report, std::ostream& os);

}  // namespace negpr
