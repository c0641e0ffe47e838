#include "negpr/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace negpr {

void adam_step(AdamState& state, std::vector<Mat>& params, const std::vector<Mat>& grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("adam_step: param/grad count mismatch");
    for (size_t b = 0; b < params.size(); ++b)
        if (!params[b].same_shape(grads[b]))
            throw std::invalid_argument("adam_step: param/grad shape mismatch");

    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (size_t b = 0; b < params.size(); ++b) {
            state.m[b].assign(params[b].size(), 0.0);
            state.v[b].assign(params[b].size(), 0.0);
        }
    } else if (state.m.size() != params.size()) {
        throw std::invalid_argument("adam_step: state does not match params");
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    for (size_t b = 0; b < params.size(); ++b) {
        double* p = params[b].a.data();
        const double* g = grads[b].a.data();
        double* m = state.m[b].data();
        double* v = state.v[b].data();
        const size_t n = params[b].size();
        for (size_t i = 0; i < n; ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
            p[i] -= state.lr * state.weight_decay * p[i];
        }
    }
}

}  // namespace negpr
