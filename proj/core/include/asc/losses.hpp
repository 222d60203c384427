#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "asc/layers.hpp"
#include "asc/tensor.hpp"

namespace asc {

inline constexpr double kProbFloor = 1e-7;

/// Mean negative log-likelihood over the batch. Predictions are clamped
/// to [1e-7, 1] before the log; labels are expected one-hot (or soft).
/// Returns the loss and fills grad (d loss / d y_hat).
template <typename T>
double cross_entropy_loss(const Tensor<T>& y_hat, const Tensor<T>& y, Tensor<T>* grad = nullptr) {
    require_same_shape(y_hat, y, "cross_entropy_loss");
    const std::size_t N = y_hat.dim(0), C = y_hat.dim(1);
    if (grad) *grad = Tensor<T>(y_hat.shape);
    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            double p = std::clamp(static_cast<double>(y_hat.at(n, c)), kProbFloor, 1.0);
            double t = y.at(n, c);
            if (t != 0.0) loss -= t * std::log(p);
            if (grad && t != 0.0) {
                bool clamped = static_cast<double>(y_hat.at(n, c)) < kProbFloor ||
                               static_cast<double>(y_hat.at(n, c)) > 1.0;
                grad->at(n, c) = clamped ? T(0)
                                         : static_cast<T>(-t / p / static_cast<double>(N));
            }
        }
    return loss / static_cast<double>(N);
}

/// Sum over samples of KL(y || y_hat) plus (lambda/2) * ||theta||^2.
/// Written for mixup soft labels; 0*log(0/q) is taken as 0. The L2
/// gradient (lambda * theta) is NOT folded in here because layer
/// backward passes overwrite parameter gradients; call add_l2_gradient
/// after the backward pass instead.
template <typename T>
double kl_mixup_loss(const Tensor<T>& y_hat, const Tensor<T>& y, double lambda,
                     const std::vector<ParamRef<T>>& params, Tensor<T>* grad = nullptr) {
    require_same_shape(y_hat, y, "kl_mixup_loss");
    const std::size_t N = y_hat.dim(0), C = y_hat.dim(1);
    if (grad) *grad = Tensor<T>(y_hat.shape);
    double loss = 0.0;
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            double t = y.at(n, c);
            if (t == 0.0) continue;
            double p = std::clamp(static_cast<double>(y_hat.at(n, c)), kProbFloor, 1.0);
            loss += t * std::log(t / p);
            if (grad) {
                bool clamped = static_cast<double>(y_hat.at(n, c)) < kProbFloor ||
                               static_cast<double>(y_hat.at(n, c)) > 1.0;
                grad->at(n, c) = clamped ? T(0) : static_cast<T>(-t / p);
            }
        }
    double l2 = 0.0;
    for (const auto& p : params) {
        if (!p.trainable) continue;
        for (std::size_t i = 0; i < p.value->numel(); ++i) {
            double w = (*p.value)[i];
            l2 += w * w;
        }
    }
    return loss + 0.5 * lambda * l2;
}

template <typename T>
void add_l2_gradient(const std::vector<ParamRef<T>>& params, double lambda) {
    if (lambda == 0.0) return;
    for (const auto& p : params) {
        if (!p.trainable || !p.grad) continue;
        for (std::size_t i = 0; i < p.value->numel(); ++i)
            (*p.grad)[i] += static_cast<T>(lambda * (*p.value)[i]);
    }
}

}  // namespace asc
