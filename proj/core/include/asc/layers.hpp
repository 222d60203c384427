#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "asc/tensor.hpp"

namespace asc {

enum class Mode { Train, Infer };

template <typename T>
struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<T>* grad;
    bool trainable = true;  // running stats are carried but never optimized
};

/// One differentiable layer over [N,H,W,C] (or [N,D] for the head).
/// forward caches whatever backward needs; backward may only be called
/// after a forward pass on the same input.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode, std::mt19937& rng) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
    virtual std::vector<ParamRef<T>> params() { return {}; }
    virtual std::string name() const = 0;

protected:
    bool has_cache_ = false;
    void require_cache(const char* who) const {
        if (!has_cache_)
            throw ValidationError(std::string(who) + ": backward called without a cached forward");
    }
};

namespace init {

/// He-style truncated normal: sd = sqrt(2 / fan_in), resampled beyond
/// two standard deviations.
template <typename T>
void he_truncated_normal(Tensor<T>& w, std::size_t fan_in, std::mt19937& rng) {
    double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
    std::normal_distribution<double> dist(0.0, sd);
    for (auto& v : w.values) {
        double x;
        do { x = dist(rng); } while (std::abs(x) > 2.0 * sd);
        v = static_cast<T>(x);
    }
}

}  // namespace init

/// Same-padding stride-1 cross-correlation. in_offset/in_total allow the
/// layer to consume a channel slice of a wider input, which is how the
/// decomposed-convolution paths share one input tensor.
template <typename T>
class Conv2d : public Layer<T> {
public:
    Conv2d(std::string name, std::size_t kernel, std::size_t c_in, std::size_t c_out,
           std::mt19937& rng, std::size_t in_offset = 0, std::size_t in_total = 0)
        : name_(std::move(name)),
          k_(kernel),
          c_in_(c_in),
          c_out_(c_out),
          in_offset_(in_offset),
          in_total_(in_total == 0 ? c_in : in_total),
          weight_({kernel, kernel, c_in, c_out}),
          bias_({c_out}),
          grad_weight_({kernel, kernel, c_in, c_out}),
          grad_bias_({c_out}) {
        if (kernel % 2 == 0) throw ValidationError(name_ + ": kernel must be odd");
        init::he_truncated_normal(weight_, kernel * kernel * c_in, rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode, std::mt19937&) override {
        check_input(x);
        x_ = x;
        this->has_cache_ = true;
        const std::size_t N = x.dim(0), H = x.dim(1), W = x.dim(2);
        const long pad = static_cast<long>(k_ / 2);
        Tensor<T> out({N, H, W, c_out_});
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx) {
                    T* dst = &out.at(n, y, xx, 0);
                    for (std::size_t c = 0; c < c_out_; ++c) dst[c] = bias_[c];
                    for (std::size_t ky = 0; ky < k_; ++ky) {
                        long yi = static_cast<long>(y + ky) - pad;
                        if (yi < 0 || yi >= static_cast<long>(H)) continue;
                        for (std::size_t kx = 0; kx < k_; ++kx) {
                            long xi = static_cast<long>(xx + kx) - pad;
                            if (xi < 0 || xi >= static_cast<long>(W)) continue;
                            const T* src = &x.at(n, static_cast<std::size_t>(yi),
                                                 static_cast<std::size_t>(xi), in_offset_);
                            const T* wp = &weight_.at(ky, kx, 0, 0);
                            for (std::size_t ci = 0; ci < c_in_; ++ci) {
                                T v = src[ci];
                                if (v == T(0)) continue;
                                const T* wrow = wp + ci * c_out_;
                                for (std::size_t c = 0; c < c_out_; ++c) dst[c] += v * wrow[c];
                            }
                        }
                    }
                }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        const std::size_t N = x_.dim(0), H = x_.dim(1), W = x_.dim(2);
        const long pad = static_cast<long>(k_ / 2);
        Tensor<T> gin(x_.shape);
        grad_weight_.fill(T(0));
        grad_bias_.fill(T(0));
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx) {
                    const T* go = &g.at(n, y, xx, 0);
                    for (std::size_t c = 0; c < c_out_; ++c) grad_bias_[c] += go[c];
                    for (std::size_t ky = 0; ky < k_; ++ky) {
                        long yi = static_cast<long>(y + ky) - pad;
                        if (yi < 0 || yi >= static_cast<long>(H)) continue;
                        for (std::size_t kx = 0; kx < k_; ++kx) {
                            long xi = static_cast<long>(xx + kx) - pad;
                            if (xi < 0 || xi >= static_cast<long>(W)) continue;
                            const T* src = &x_.at(n, static_cast<std::size_t>(yi),
                                                  static_cast<std::size_t>(xi), in_offset_);
                            T* gsrc = &gin.at(n, static_cast<std::size_t>(yi),
                                              static_cast<std::size_t>(xi), in_offset_);
                            T* gw = &grad_weight_.at(ky, kx, 0, 0);
                            const T* wp = &weight_.at(ky, kx, 0, 0);
                            for (std::size_t ci = 0; ci < c_in_; ++ci) {
                                T v = src[ci];
                                T acc = T(0);
                                T* gwrow = gw + ci * c_out_;
                                const T* wrow = wp + ci * c_out_;
                                for (std::size_t c = 0; c < c_out_; ++c) {
                                    gwrow[c] += v * go[c];
                                    acc += wrow[c] * go[c];
                                }
                                gsrc[ci] += acc;
                            }
                        }
                    }
                }
        return gin;
    }

    std::vector<ParamRef<T>> params() override {
        return {{name_ + ".weight", &weight_, &grad_weight_, true},
                {name_ + ".bias", &bias_, &grad_bias_, true}};
    }

    std::string name() const override { return name_; }

    Tensor<T>& weight() { return weight_; }
    Tensor<T>& bias() { return bias_; }

private:
    void check_input(const Tensor<T>& x) const {
        if (x.rank() != 4 || x.dim(3) != in_total_)
            throw ShapeError(name_ + ": expected input [N,H,W," + std::to_string(in_total_) +
                             "], got " + x.shape_str());
    }

    std::string name_;
    std::size_t k_, c_in_, c_out_, in_offset_, in_total_;
    Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
    Tensor<T> x_;
};

/// Batch normalization over the channel (last) dimension. Train mode
/// normalizes by batch statistics and updates running stats with
/// momentum 0.99; infer mode uses the running stats.
template <typename T>
class BatchNorm : public Layer<T> {
public:
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.99;

    BatchNorm(std::string name, std::size_t channels)
        : name_(std::move(name)),
          c_(channels),
          gamma_({channels}, T(1)),
          beta_({channels}),
          grad_gamma_({channels}),
          grad_beta_({channels}),
          running_mean_({channels}),
          running_var_({channels}, T(1)) {}

    Tensor<T> forward(const Tensor<T>& x, Mode mode, std::mt19937&) override {
        if (x.rank() < 2 || x.shape.back() != c_)
            throw ShapeError(name_ + ": expected trailing channel dim " + std::to_string(c_) +
                             ", got " + x.shape_str());
        const std::size_t rows = x.numel() / c_;
        Tensor<T> out(x.shape);
        mean_.assign(c_, 0.0);
        inv_std_.assign(c_, 0.0);

        if (mode == Mode::Train) {
            std::vector<double> sum(c_, 0.0), sq(c_, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const T* row = x.data() + r * c_;
                for (std::size_t c = 0; c < c_; ++c) {
                    double v = row[c];
                    sum[c] += v;
                    sq[c] += v * v;
                }
            }
            for (std::size_t c = 0; c < c_; ++c) {
                mean_[c] = sum[c] / static_cast<double>(rows);
                double var = std::max(sq[c] / static_cast<double>(rows) - mean_[c] * mean_[c], 0.0);
                inv_std_[c] = 1.0 / std::sqrt(var + kEps);
                running_mean_[c] = static_cast<T>(kMomentum * running_mean_[c] +
                                                  (1.0 - kMomentum) * mean_[c]);
                running_var_[c] = static_cast<T>(kMomentum * running_var_[c] +
                                                 (1.0 - kMomentum) * var);
            }
        } else {
            for (std::size_t c = 0; c < c_; ++c) {
                mean_[c] = running_mean_[c];
                inv_std_[c] = 1.0 / std::sqrt(static_cast<double>(running_var_[c]) + kEps);
            }
        }

        xhat_ = Tensor<T>(x.shape);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* row = x.data() + r * c_;
            T* xh = xhat_.data() + r * c_;
            T* o = out.data() + r * c_;
            for (std::size_t c = 0; c < c_; ++c) {
                xh[c] = static_cast<T>((row[c] - mean_[c]) * inv_std_[c]);
                o[c] = gamma_[c] * xh[c] + beta_[c];
            }
        }
        train_mode_ = mode == Mode::Train;
        this->has_cache_ = true;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        const std::size_t rows = g.numel() / c_;
        grad_gamma_.fill(T(0));
        grad_beta_.fill(T(0));
        std::vector<double> sum_g(c_, 0.0), sum_gx(c_, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* go = g.data() + r * c_;
            const T* xh = xhat_.data() + r * c_;
            for (std::size_t c = 0; c < c_; ++c) {
                grad_gamma_[c] += go[c] * xh[c];
                grad_beta_[c] += go[c];
                sum_g[c] += go[c];
                sum_gx[c] += static_cast<double>(go[c]) * xh[c];
            }
        }
        Tensor<T> gin(g.shape);
        const double n = static_cast<double>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* go = g.data() + r * c_;
            const T* xh = xhat_.data() + r * c_;
            T* gi = gin.data() + r * c_;
            for (std::size_t c = 0; c < c_; ++c) {
                if (train_mode_) {
                    double t = static_cast<double>(go[c]) - sum_g[c] / n -
                               static_cast<double>(xh[c]) * sum_gx[c] / n;
                    gi[c] = static_cast<T>(static_cast<double>(gamma_[c]) * inv_std_[c] * t);
                } else {
                    gi[c] = static_cast<T>(static_cast<double>(gamma_[c]) * inv_std_[c] * go[c]);
                }
            }
        }
        return gin;
    }

    std::vector<ParamRef<T>> params() override {
        return {{name_ + ".gamma", &gamma_, &grad_gamma_, true},
                {name_ + ".beta", &beta_, &grad_beta_, true},
                {name_ + ".running_mean", &running_mean_, nullptr, false},
                {name_ + ".running_var", &running_var_, nullptr, false}};
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::size_t c_;
    Tensor<T> gamma_, beta_, grad_gamma_, grad_beta_;
    Tensor<T> running_mean_, running_var_;
    Tensor<T> xhat_;
    std::vector<double> mean_, inv_std_;
    bool train_mode_ = false;
};

template <typename T>
class ReLU : public Layer<T> {
public:
    explicit ReLU(std::string name) : name_(std::move(name)) {}

    Tensor<T> forward(const Tensor<T>& x, Mode, std::mt19937&) override {
        mask_.assign(x.numel(), false);
        Tensor<T> out(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i) {
            bool pos = x[i] > T(0);
            mask_[i] = pos;
            out[i] = pos ? x[i] : T(0);
        }
        this->has_cache_ = true;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        Tensor<T> gin(g.shape);
        for (std::size_t i = 0; i < g.numel(); ++i) gin[i] = mask_[i] ? g[i] : T(0);
        return gin;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::vector<bool> mask_;
};

/// 2x2 average pooling, stride 2, floor division of spatial dims.
template <typename T>
class AvgPool2x2 : public Layer<T> {
public:
    explicit AvgPool2x2(std::string name) : name_(std::move(name)) {}

    Tensor<T> forward(const Tensor<T>& x, Mode, std::mt19937&) override {
        if (x.rank() != 4) throw ShapeError(name_ + ": expected 4-d input, got " + x.shape_str());
        in_shape_ = x.shape;
        const std::size_t N = x.dim(0), H = x.dim(1) / 2, W = x.dim(2) / 2, C = x.dim(3);
        if (H == 0 || W == 0) throw ShapeError(name_ + ": spatial dims too small " + x.shape_str());
        Tensor<T> out({N, H, W, C});
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx)
                    for (std::size_t c = 0; c < C; ++c)
                        out.at(n, y, xx, c) =
                            (x.at(n, 2 * y, 2 * xx, c) + x.at(n, 2 * y, 2 * xx + 1, c) +
                             x.at(n, 2 * y + 1, 2 * xx, c) + x.at(n, 2 * y + 1, 2 * xx + 1, c)) /
                            T(4);
        this->has_cache_ = true;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        Tensor<T> gin(in_shape_);
        const std::size_t N = g.dim(0), H = g.dim(1), W = g.dim(2), C = g.dim(3);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx)
                    for (std::size_t c = 0; c < C; ++c) {
                        T v = g.at(n, y, xx, c) / T(4);
                        gin.at(n, 2 * y, 2 * xx, c) = v;
                        gin.at(n, 2 * y, 2 * xx + 1, c) = v;
                        gin.at(n, 2 * y + 1, 2 * xx, c) = v;
                        gin.at(n, 2 * y + 1, 2 * xx + 1, c) = v;
                    }
        return gin;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::vector<std::size_t> in_shape_;
};

/// [N,H,W,C] -> [N,C] spatial mean.
template <typename T>
class GlobalAvgPool : public Layer<T> {
public:
    explicit GlobalAvgPool(std::string name) : name_(std::move(name)) {}

    Tensor<T> forward(const Tensor<T>& x, Mode, std::mt19937&) override {
        if (x.rank() != 4) throw ShapeError(name_ + ": expected 4-d input, got " + x.shape_str());
        in_shape_ = x.shape;
        const std::size_t N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
        Tensor<T> out({N, C});
        const T scale = T(1) / static_cast<T>(H * W);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx)
                    for (std::size_t c = 0; c < C; ++c)
                        out.at(n, c) += x.at(n, y, xx, c) * scale;
        this->has_cache_ = true;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        Tensor<T> gin(in_shape_);
        const std::size_t N = in_shape_[0], H = in_shape_[1], W = in_shape_[2], C = in_shape_[3];
        const T scale = T(1) / static_cast<T>(H * W);
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t y = 0; y < H; ++y)
                for (std::size_t xx = 0; xx < W; ++xx)
                    for (std::size_t c = 0; c < C; ++c)
                        gin.at(n, y, xx, c) = g.at(n, c) * scale;
        return gin;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::vector<std::size_t> in_shape_;
};

/// Inverted dropout: identity in infer mode, survivors scaled by 1/(1-p).
template <typename T>
class Dropout : public Layer<T> {
public:
    Dropout(std::string name, double p) : name_(std::move(name)), p_(p) {
        if (p < 0.0 || p >= 1.0) throw ValidationError(name_ + ": p must be in [0, 1)");
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode, std::mt19937& rng) override {
        this->has_cache_ = true;
        if (mode == Mode::Infer || p_ == 0.0) {
            scale_.assign(x.numel(), T(1));
            return x;
        }
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const T keep = static_cast<T>(1.0 / (1.0 - p_));
        scale_.assign(x.numel(), T(0));
        Tensor<T> out(x.shape);
        for (std::size_t i = 0; i < x.numel(); ++i) {
            if (u(rng) >= p_) {
                scale_[i] = keep;
                out[i] = x[i] * keep;
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        Tensor<T> gin(g.shape);
        for (std::size_t i = 0; i < g.numel(); ++i) gin[i] = g[i] * scale_[i];
        return gin;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    double p_;
    std::vector<T> scale_;
};

template <typename T>
class FullyConnected : public Layer<T> {
public:
    FullyConnected(std::string name, std::size_t in, std::size_t out, std::mt19937& rng)
        : name_(std::move(name)),
          in_(in),
          out_(out),
          weight_({in, out}),
          bias_({out}),
          grad_weight_({in, out}),
          grad_bias_({out}) {
        init::he_truncated_normal(weight_, in, rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode, std::mt19937&) override {
        if (x.rank() != 2 || x.dim(1) != in_)
            throw ShapeError(name_ + ": expected [N," + std::to_string(in_) + "], got " +
                             x.shape_str());
        x_ = x;
        this->has_cache_ = true;
        const std::size_t N = x.dim(0);
        Tensor<T> out({N, out_});
        for (std::size_t n = 0; n < N; ++n) {
            T* o = &out.at(n, 0);
            for (std::size_t c = 0; c < out_; ++c) o[c] = bias_[c];
            for (std::size_t i = 0; i < in_; ++i) {
                T v = x.at(n, i);
                const T* w = &weight_.at(i, 0);
                for (std::size_t c = 0; c < out_; ++c) o[c] += v * w[c];
            }
        }
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        const std::size_t N = x_.dim(0);
        Tensor<T> gin(x_.shape);
        grad_weight_.fill(T(0));
        grad_bias_.fill(T(0));
        for (std::size_t n = 0; n < N; ++n) {
            const T* go = &g.at(n, 0);
            for (std::size_t c = 0; c < out_; ++c) grad_bias_[c] += go[c];
            for (std::size_t i = 0; i < in_; ++i) {
                T v = x_.at(n, i);
                T* gw = &grad_weight_.at(i, 0);
                const T* w = &weight_.at(i, 0);
                T acc = T(0);
                for (std::size_t c = 0; c < out_; ++c) {
                    gw[c] += v * go[c];
                    acc += w[c] * go[c];
                }
                gin.at(n, i) = acc;
            }
        }
        return gin;
    }

    std::vector<ParamRef<T>> params() override {
        return {{name_ + ".weight", &weight_, &grad_weight_, true},
                {name_ + ".bias", &bias_, &grad_bias_, true}};
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::size_t in_, out_;
    Tensor<T> weight_, bias_, grad_weight_, grad_bias_;
    Tensor<T> x_;
};

template <typename T>
class Softmax : public Layer<T> {
public:
    explicit Softmax(std::string name) : name_(std::move(name)) {}

    Tensor<T> forward(const Tensor<T>& x, Mode, std::mt19937&) override {
        if (x.rank() != 2) throw ShapeError(name_ + ": expected [N,C], got " + x.shape_str());
        const std::size_t N = x.dim(0), C = x.dim(1);
        y_ = Tensor<T>(x.shape);
        for (std::size_t n = 0; n < N; ++n) {
            T mx = x.at(n, 0);
            for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, x.at(n, c));
            double sum = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                double e = std::exp(static_cast<double>(x.at(n, c) - mx));
                y_.at(n, c) = static_cast<T>(e);
                sum += e;
            }
            for (std::size_t c = 0; c < C; ++c)
                y_.at(n, c) = static_cast<T>(y_.at(n, c) / sum);
        }
        this->has_cache_ = true;
        return y_;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        const std::size_t N = g.dim(0), C = g.dim(1);
        Tensor<T> gin(g.shape);
        for (std::size_t n = 0; n < N; ++n) {
            double dot = 0.0;
            for (std::size_t c = 0; c < C; ++c)
                dot += static_cast<double>(g.at(n, c)) * y_.at(n, c);
            for (std::size_t c = 0; c < C; ++c)
                gin.at(n, c) = static_cast<T>(y_.at(n, c) *
                                              (static_cast<double>(g.at(n, c)) - dot));
        }
        return gin;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    Tensor<T> y_;
};

/// Four parallel sub-convolutions over channel slices of one input,
/// outputs concatenated along the channel axis:
///   P1: 3x3 over channels [0, C_in/4)      -> C_out/4
///   P2: 1x1 over channels [0, C_in/2)      -> C_out/4
///   P3: 1x1 over channels [C_in/2, C_in)   -> C_out/4
///   P4: 1x1 over all C_in channels         -> C_out/4
template <typename T>
class DecomposedConv2d : public Layer<T> {
public:
    DecomposedConv2d(std::string name, std::size_t c_in, std::size_t c_out, std::mt19937& rng)
        : name_(std::move(name)), c_in_(c_in), c_out_(c_out) {
        if (c_in % 4 != 0 || c_out % 4 != 0)
            throw ValidationError(name_ + ": channel counts must be divisible by 4, got " +
                                  std::to_string(c_in) + "->" + std::to_string(c_out));
        const std::size_t q = c_out / 4;
        paths_.emplace_back(std::make_unique<Conv2d<T>>(name_ + ".p1", 3, c_in / 4, q, rng, 0, c_in));
        paths_.emplace_back(std::make_unique<Conv2d<T>>(name_ + ".p2", 1, c_in / 2, q, rng, 0, c_in));
        paths_.emplace_back(
            std::make_unique<Conv2d<T>>(name_ + ".p3", 1, c_in / 2, q, rng, c_in / 2, c_in));
        paths_.emplace_back(std::make_unique<Conv2d<T>>(name_ + ".p4", 1, c_in, q, rng, 0, c_in));
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode, std::mt19937& rng) override {
        const std::size_t N = x.dim(0), H = x.dim(1), W = x.dim(2);
        Tensor<T> out({N, H, W, c_out_});
        const std::size_t q = c_out_ / 4;
        for (std::size_t p = 0; p < 4; ++p) {
            Tensor<T> part = paths_[p]->forward(x, mode, rng);
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t y = 0; y < H; ++y)
                    for (std::size_t xx = 0; xx < W; ++xx) {
                        const T* src = &part.at(n, y, xx, 0);
                        T* dst = &out.at(n, y, xx, p * q);
                        for (std::size_t c = 0; c < q; ++c) dst[c] = src[c];
                    }
        }
        this->has_cache_ = true;
        return out;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        this->require_cache(name_.c_str());
        const std::size_t N = g.dim(0), H = g.dim(1), W = g.dim(2);
        const std::size_t q = c_out_ / 4;
        Tensor<T> gin;
        for (std::size_t p = 0; p < 4; ++p) {
            Tensor<T> slice({N, H, W, q});
            for (std::size_t n = 0; n < N; ++n)
                for (std::size_t y = 0; y < H; ++y)
                    for (std::size_t xx = 0; xx < W; ++xx) {
                        const T* src = &g.at(n, y, xx, p * q);
                        T* dst = &slice.at(n, y, xx, 0);
                        for (std::size_t c = 0; c < q; ++c) dst[c] = src[c];
                    }
            Tensor<T> gp = paths_[p]->backward(slice);
            if (p == 0) {
                gin = std::move(gp);
            } else {
                for (std::size_t i = 0; i < gin.numel(); ++i) gin[i] += gp[i];
            }
        }
        return gin;
    }

    std::vector<ParamRef<T>> params() override {
        std::vector<ParamRef<T>> out;
        for (auto& p : paths_)
            for (auto& r : p->params()) out.push_back(r);
        return out;
    }

    std::string name() const override { return name_; }

private:
    std::string name_;
    std::size_t c_in_, c_out_;
    std::vector<std::unique_ptr<Conv2d<T>>> paths_;
};

}  // namespace asc
