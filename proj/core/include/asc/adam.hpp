#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "asc/errors.hpp"
#include "asc/layers.hpp"

namespace asc {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias correction. Moment accumulators are created lazily on
/// the first step and keyed by parameter order, which is stable for a
/// fixed model.
template <typename T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<ParamRef<T>>& params) {
        if (m_.empty()) {
            for (const auto& p : params) {
                if (!p.trainable) continue;
                m_.emplace_back(p.value->shape);
                v_.emplace_back(p.value->shape);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
        const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
        std::size_t slot = 0;
        for (const auto& p : params) {
            if (!p.trainable) continue;
            Tensor<T>& m = m_[slot];
            Tensor<T>& v = v_[slot];
            ++slot;
            for (std::size_t i = 0; i < p.value->numel(); ++i) {
                double g = (*p.grad)[i];
                if (!std::isfinite(g))
                    throw NumericalError("non-finite gradient in " + p.name + " at step " +
                                         std::to_string(t_));
                double mi = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
                double vi = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
                m[i] = static_cast<T>(mi);
                v[i] = static_cast<T>(vi);
                double mhat = mi / bc1;
                double vhat = vi / bc2;
                (*p.value)[i] -= static_cast<T>(cfg_.learning_rate * mhat /
                                                (std::sqrt(vhat) + cfg_.epsilon));
            }
        }
    }

    long step_count() const { return t_; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<Tensor<T>> m_, v_;
};

}  // namespace asc
