#pragma once

#include "negpr/mat.hpp"

namespace negpr {

/// Adam with bias correction and decoupled weight decay. One state per
/// optimizer instance; moment buffers mirror the parameter block shapes.
struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    long step = 0;
    std::vector<Vec> m;
    std::vector<Vec> v;

    AdamState() = default;
    AdamState(double lr_, double weight_decay_) : lr(lr_), weight_decay(weight_decay_) {}
};

/// One Adam step in place. Grows/validates moment buffers on first use;
/// throws on shape mismatch afterwards.
void adam_step(AdamState& state, std::vector<Mat>& params, const std::vector<Mat>& grads);

}  // namespace negpr
