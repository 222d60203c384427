#pragma once

#include <cstddef>
#include <random>

#include "asc/tensor.hpp"

namespace asc {

struct MixupConfig {
    bool enabled = true;
    double alpha = 0.4;  // Beta(alpha, alpha) mixing coefficient
};

struct SpecAugmentConfig {
    bool enabled = true;
    std::size_t n_time_masks = 2;
    std::size_t max_time_width = 20;   // frames
    std::size_t n_freq_masks = 2;
    std::size_t max_freq_width = 20;   // bins
    // Masked entries are set to 0, the per-channel mean after
    // standardization.
};

/// lambda ~ Beta(alpha, alpha), sampled via two gamma draws.
inline double sample_mixup_lambda(double alpha, std::mt19937& rng) {
    std::gamma_distribution<double> g(alpha, 1.0);
    double a = g(rng), b = g(rng);
    if (a + b == 0.0) return 0.5;
    return a / (a + b);
}

/// x~ = lam*x1 + (1-lam)*x2, y~ = lam*y1 + (1-lam)*y2. Label rows stay
/// on the probability simplex for any lam in [0,1].
template <typename T>
void mixup_batch(const Tensor<T>& x1, const Tensor<T>& x2, const Tensor<T>& y1,
                 const Tensor<T>& y2, double lam, Tensor<T>& x_out, Tensor<T>& y_out) {
    require_same_shape(x1, x2, "mixup_batch x");
    require_same_shape(y1, y2, "mixup_batch y");
    if (lam < 0.0 || lam > 1.0) throw ValidationError("mixup_batch: lambda must be in [0,1]");
    x_out = Tensor<T>(x1.shape);
    y_out = Tensor<T>(y1.shape);
    const T l = static_cast<T>(lam), r = static_cast<T>(1.0 - lam);
    for (std::size_t i = 0; i < x1.numel(); ++i) x_out[i] = l * x1[i] + r * x2[i];
    for (std::size_t i = 0; i < y1.numel(); ++i) y_out[i] = l * y1[i] + r * y2[i];
}

/// Zeroes random time columns and frequency rows (all channels) of one
/// patch [H=bins, W=frames, C]. Mask widths are uniform on
/// [0, max_width]; zero-width masks are no-ops.
template <typename T>
void spec_augment_inplace(Tensor<T>& patch, const SpecAugmentConfig& cfg, std::mt19937& rng) {
    if (!cfg.enabled) return;
    const std::size_t bins = patch.dim(0), frames = patch.dim(1), ch = patch.dim(2);
    if (cfg.max_freq_width >= bins || cfg.max_time_width >= frames)
        throw ValidationError("spec_augment: mask width must be smaller than the patch dims");

    auto mask_band = [&](bool time_axis) {
        const std::size_t limit = time_axis ? frames : bins;
        const std::size_t max_w = time_axis ? cfg.max_time_width : cfg.max_freq_width;
        std::uniform_int_distribution<std::size_t> wd(0, max_w);
        const std::size_t w = wd(rng);
        if (w == 0) return;
        std::uniform_int_distribution<std::size_t> pd(0, limit - w);
        const std::size_t p0 = pd(rng);
        for (std::size_t b = 0; b < bins; ++b)
            for (std::size_t t = 0; t < frames; ++t) {
                const std::size_t coord = time_axis ? t : b;
                if (coord >= p0 && coord < p0 + w)
                    for (std::size_t c = 0; c < ch; ++c) patch.at(b, t, c) = T(0);
            }
    };

    for (std::size_t i = 0; i < cfg.n_time_masks; ++i) mask_band(true);
    for (std::size_t i = 0; i < cfg.n_freq_masks; ++i) mask_band(false);
}

}  // namespace asc
