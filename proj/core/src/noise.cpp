#include "negpr/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "negpr/rng.hpp"

namespace negpr {

int NoiseRecord::num_flipped() const {
    return static_cast<int>(std::count(flip_mask.begin(), flip_mask.end(), true));
}

NoiseRecord inject_label_noise(const std::vector<int>& labels, double ratio, int num_classes,
                               std::uint64_t seed) {
    if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("noise ratio must be in [0,1]");
    if (num_classes < 2 && ratio > 0.0)
        throw std::invalid_argument("label noise needs at least 2 classes");

    const int n = static_cast<int>(labels.size());
    const int n_flip = static_cast<int>(std::lround(ratio * n));

    NoiseRecord rec;
    rec.original_labels = labels;
    rec.noisy_labels = labels;
    rec.flip_mask.assign(n, false);
    rec.noise_ratio = ratio;

    Rng rng(seed);
    auto chosen = rng.sample_without_replacement(n, n_flip);
    std::sort(chosen.begin(), chosen.end());
    for (size_t i : chosen) {
        const int c = labels[i];
        // Uniform over the other C-1 classes.
        const int u = static_cast<int>(rng.uniform_int(num_classes - 1));
        rec.noisy_labels[i] = u >= c ? u + 1 : u;
        rec.flip_mask[i] = true;
    }
    return rec;
}

NoiseRecord inject_label_noise(DomainDataset& ds, double ratio, std::uint64_t seed) {
    NoiseRecord rec = inject_label_noise(ds.labels(), ratio, ds.num_classes, seed);
    for (size_t i = 0; i < ds.graphs.size(); ++i) ds.graphs[i].label = rec.noisy_labels[i];
    return rec;
}

}  // namespace negpr
