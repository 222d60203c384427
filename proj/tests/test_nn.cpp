#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "asc/adam.hpp"
#include "asc/layers.hpp"
#include "asc/losses.hpp"

using namespace asc;

namespace {

Tensor<double> random_tensor(std::vector<std::size_t> shape, std::mt19937& rng,
                             double lo = -1.0, double hi = 1.0) {
    Tensor<double> t(std::move(shape));
    std::uniform_real_distribution<double> d(lo, hi);
    for (auto& v : t.values) v = d(rng);
    return t;
}

// Textbook same-padded cross-correlation written with no shortcuts; the
// oracle the production convolution is checked against.
Tensor<double> naive_conv(const Tensor<double>& x, const Tensor<double>& w,
                          const Tensor<double>& b, std::size_t in_offset = 0) {
    const std::size_t N = x.dim(0), H = x.dim(1), W = x.dim(2);
    const std::size_t k = w.dim(0), ci = w.dim(2), co = w.dim(3);
    const long pad = long(k / 2);
    Tensor<double> out({N, H, W, co});
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t xx = 0; xx < W; ++xx)
                for (std::size_t c = 0; c < co; ++c) {
                    double acc = b[c];
                    for (std::size_t ky = 0; ky < k; ++ky)
                        for (std::size_t kx = 0; kx < k; ++kx)
                            for (std::size_t cc = 0; cc < ci; ++cc) {
                                long yi = long(y + ky) - pad;
                                long xi = long(xx + kx) - pad;
                                if (yi < 0 || yi >= long(H) || xi < 0 || xi >= long(W)) continue;
                                acc += x.at(n, std::size_t(yi), std::size_t(xi), in_offset + cc) *
                                       w.at(ky, kx, cc, c);
                            }
                    out.at(n, y, xx, c) = acc;
                }
    return out;
}

}  // namespace

TEST_CASE("Conv2d forward matches the naive-loop oracle") {
    std::mt19937 rng(1);
    for (std::size_t k : {1ul, 3ul, 5ul}) {
        Conv2d<double> conv("c", k, 3, 4, rng);
        Tensor<double> x = random_tensor({2, 6, 5, 3}, rng);
        Tensor<double> got = conv.forward(x, Mode::Train, rng);
        Tensor<double> want = naive_conv(x, conv.weight(), conv.bias());
        REQUIRE(got.shape == want.shape);
        for (std::size_t i = 0; i < got.numel(); ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
}

TEST_CASE("Conv2d channel-slice input matches the oracle on the slice") {
    std::mt19937 rng(2);
    Conv2d<double> conv("c", 3, 2, 4, rng, /*in_offset=*/3, /*in_total=*/8);
    Tensor<double> x = random_tensor({1, 5, 5, 8}, rng);
    Tensor<double> got = conv.forward(x, Mode::Train, rng);
    Tensor<double> want = naive_conv(x, conv.weight(), conv.bias(), 3);
    for (std::size_t i = 0; i < got.numel(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
}

TEST_CASE("Conv2d rejects wrong channel count and even kernels") {
    std::mt19937 rng(3);
    Conv2d<double> conv("c", 3, 4, 2, rng);
    Tensor<double> x({1, 4, 4, 3});
    CHECK_THROWS_AS(conv.forward(x, Mode::Train, rng), ShapeError);
    CHECK_THROWS_AS(Conv2d<double>("c2", 2, 4, 2, rng), ValidationError);
}

TEST_CASE("decomposed conv equals manually assembled slice convolutions") {
    std::mt19937 rng(4);
    const std::size_t c_in = 8, c_out = 12;
    DecomposedConv2d<double> dconv("d", c_in, c_out, rng);
    Tensor<double> x = random_tensor({2, 5, 4, c_in}, rng);
    Tensor<double> got = dconv.forward(x, Mode::Train, rng);

    // rebuild the same output from the path parameters with the oracle
    auto prm = dconv.params();
    REQUIRE(prm.size() == 8);  // 4 paths x (weight, bias)
    struct PathSpec { std::size_t offset; };
    const PathSpec specs[4] = {{0}, {0}, {c_in / 2}, {0}};
    const std::size_t q = c_out / 4;
    for (std::size_t p = 0; p < 4; ++p) {
        Tensor<double> part = naive_conv(x, *prm[2 * p].value, *prm[2 * p + 1].value,
                                         specs[p].offset);
        for (std::size_t n = 0; n < 2; ++n)
            for (std::size_t y = 0; y < 5; ++y)
                for (std::size_t xx = 0; xx < 4; ++xx)
                    for (std::size_t c = 0; c < q; ++c)
                        CHECK(got.at(n, y, xx, p * q + c) ==
                              doctest::Approx(part.at(n, y, xx, c)).epsilon(1e-10));
    }
}

TEST_CASE("decomposed conv slice geometry: only 3x3 path sees padding structure") {
    std::mt19937 rng(5);
    DecomposedConv2d<double> dconv("d", 4, 4, rng);
    auto prm = dconv.params();
    // path kernels: 3x3, 1x1, 1x1, 1x1 with input widths 1, 2, 2, 4
    CHECK(prm[0].value->shape == std::vector<std::size_t>({3, 3, 1, 1}));
    CHECK(prm[2].value->shape == std::vector<std::size_t>({1, 1, 2, 1}));
    CHECK(prm[4].value->shape == std::vector<std::size_t>({1, 1, 2, 1}));
    CHECK(prm[6].value->shape == std::vector<std::size_t>({1, 1, 4, 1}));
    CHECK_THROWS_AS(DecomposedConv2d<double>("bad", 3, 8, rng), ValidationError);
}

TEST_CASE("batch norm train output has zero mean, unit variance per channel") {
    std::mt19937 rng(6);
    BatchNorm<double> bn("bn", 3);
    Tensor<double> x = random_tensor({4, 5, 5, 3}, rng, -3.0, 5.0);
    Tensor<double> y = bn.forward(x, Mode::Train, rng);
    const std::size_t rows = y.numel() / 3;
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            sum += y.data()[r * 3 + c];
            sq += y.data()[r * 3 + c] * y.data()[r * 3 + c];
        }
        CHECK(sum / double(rows) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(sq / double(rows) == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("batch norm running stats converge to the batch statistics") {
    std::mt19937 rng(7);
    BatchNorm<double> bn("bn", 2);
    Tensor<double> x({8, 1, 1, 2});
    for (std::size_t n = 0; n < 8; ++n) {
        x.at(n, 0, 0, 0) = 2.0 + 0.5 * double(n);  // mean 3.75
        x.at(n, 0, 0, 1) = -1.0;                   // constant channel
    }
    for (int i = 0; i < 800; ++i) bn.forward(x, Mode::Train, rng);
    // infer on a shifted input: channel 1 is constant so x-hat ~ 0
    Tensor<double> probe({1, 1, 1, 2});
    probe.at(0, 0, 0, 0) = 3.75;
    probe.at(0, 0, 0, 1) = -1.0;
    Tensor<double> y = bn.forward(probe, Mode::Infer, rng);
    CHECK(std::abs(y.at(0, 0, 0, 0)) < 0.05);
    CHECK(std::abs(y.at(0, 0, 0, 1)) < 0.05);
}

TEST_CASE("batch norm running stats are exposed as non-trainable params") {
    BatchNorm<double> bn("bn", 4);
    auto prm = bn.params();
    REQUIRE(prm.size() == 4);
    CHECK(prm[0].trainable);
    CHECK(prm[1].trainable);
    CHECK_FALSE(prm[2].trainable);
    CHECK_FALSE(prm[3].trainable);
}

TEST_CASE("relu clamps negatives and routes gradients through the mask") {
    std::mt19937 rng(8);
    ReLU<double> relu("r");
    Tensor<double> x({1, 4});
    x.values = {-2.0, 0.0, 3.0, -0.5};
    Tensor<double> y = relu.forward(x, Mode::Train, rng);
    CHECK(y.values == std::vector<double>({0.0, 0.0, 3.0, 0.0}));
    Tensor<double> g({1, 4}, 1.0);
    Tensor<double> gin = relu.backward(g);
    CHECK(gin.values == std::vector<double>({0.0, 0.0, 1.0, 0.0}));
}

TEST_CASE("avg pool halves spatial dims and averages 2x2 cells") {
    std::mt19937 rng(9);
    AvgPool2x2<double> pool("p");
    Tensor<double> x({1, 4, 4, 1});
    for (std::size_t i = 0; i < 16; ++i) x[i] = double(i);
    Tensor<double> y = pool.forward(x, Mode::Train, rng);
    REQUIRE(y.shape == std::vector<std::size_t>({1, 2, 2, 1}));
    CHECK(y.at(0, 0, 0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(y.at(0, 1, 1, 0) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));

    // odd dims floor; dropped row/column gets no gradient
    Tensor<double> odd = random_tensor({1, 5, 5, 2}, rng);
    Tensor<double> yo = pool.forward(odd, Mode::Train, rng);
    CHECK(yo.shape == std::vector<std::size_t>({1, 2, 2, 2}));
    Tensor<double> g({1, 2, 2, 2}, 4.0);
    Tensor<double> gin = pool.backward(g);
    REQUIRE(gin.shape == odd.shape);
    for (std::size_t xx = 0; xx < 5; ++xx) CHECK(gin.at(0, 4, xx, 0) == 0.0);
    CHECK(gin.at(0, 0, 0, 0) == doctest::Approx(1.0));
}

TEST_CASE("global average pool is the spatial mean") {
    std::mt19937 rng(10);
    GlobalAvgPool<double> gap("gap");
    Tensor<double> x = random_tensor({2, 3, 4, 5}, rng);
    Tensor<double> y = gap.forward(x, Mode::Train, rng);
    REQUIRE(y.shape == std::vector<std::size_t>({2, 5}));
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t c = 0; c < 5; ++c) {
            double sum = 0.0;
            for (std::size_t h = 0; h < 3; ++h)
                for (std::size_t w = 0; w < 4; ++w) sum += x.at(n, h, w, c);
            CHECK(y.at(n, c) == doctest::Approx(sum / 12.0).epsilon(1e-12));
        }
}

TEST_CASE("dropout: infer is identity, train preserves expectation") {
    std::mt19937 rng(11);
    Dropout<double> drop("d", 0.4);
    Tensor<double> x({1, 10000}, 1.0);
    Tensor<double> yi = drop.forward(x, Mode::Infer, rng);
    CHECK(yi.values == x.values);

    Tensor<double> yt = drop.forward(x, Mode::Train, rng);
    double mean = 0.0;
    std::size_t zeros = 0;
    for (double v : yt.values) {
        mean += v;
        if (v == 0.0) ++zeros;
        else CHECK(v == doctest::Approx(1.0 / 0.6));  // survivors scaled by 1/(1-p)
    }
    mean /= double(yt.numel());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
    CHECK(double(zeros) / double(yt.numel()) == doctest::Approx(0.4).epsilon(0.05));

    CHECK_THROWS_AS(Dropout<double>("bad", 1.0), ValidationError);
}

TEST_CASE("softmax rows are simplex points and shift-invariant") {
    std::mt19937 rng(12);
    Softmax<double> sm("s");
    Tensor<double> x = random_tensor({3, 7}, rng, -5.0, 5.0);
    Tensor<double> y = sm.forward(x, Mode::Infer, rng);
    for (std::size_t n = 0; n < 3; ++n) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 7; ++c) {
            CHECK(y.at(n, c) > 0.0);
            sum += y.at(n, c);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    Tensor<double> shifted = x;
    for (auto& v : shifted.values) v += 100.0;
    Tensor<double> y2 = sm.forward(shifted, Mode::Infer, rng);
    for (std::size_t i = 0; i < y.numel(); ++i)
        CHECK(y2[i] == doctest::Approx(y[i]).epsilon(1e-10));
}

TEST_CASE("extreme logits do not overflow softmax") {
    std::mt19937 rng(13);
    Softmax<double> sm("s");
    Tensor<double> x({1, 3});
    x.values = {1000.0, -1000.0, 999.0};
    Tensor<double> y = sm.forward(x, Mode::Infer, rng);
    CHECK(y.all_finite());
    CHECK(y.at(0, 0) > y.at(0, 2));
    CHECK(y.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("backward before forward is rejected") {
    std::mt19937 rng(14);
    Conv2d<double> conv("c", 3, 2, 2, rng);
    Tensor<double> g({1, 2, 2, 2}, 1.0);
    CHECK_THROWS_AS(conv.backward(g), ValidationError);
    BatchNorm<double> bn("bn", 2);
    CHECK_THROWS_AS(bn.backward(g), ValidationError);
    ReLU<double> relu("r");
    CHECK_THROWS_AS(relu.backward(g), ValidationError);
}

TEST_CASE("He truncated-normal init: no draw beyond two standard deviations") {
    std::mt19937 rng(15);
    Tensor<double> w({3, 3, 16, 16});
    const std::size_t fan_in = 3 * 3 * 16;
    init::he_truncated_normal(w, fan_in, rng);
    const double sd = std::sqrt(2.0 / double(fan_in));
    double sum = 0.0, sq = 0.0;
    for (double v : w.values) {
        CHECK(std::abs(v) <= 2.0 * sd);
        sum += v;
        sq += v * v;
    }
    double n = double(w.numel());
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.01));
    // truncation at 2 sigma shrinks the variance slightly below sd^2
    CHECK(sq / n < sd * sd);
    CHECK(sq / n > 0.5 * sd * sd);
}

TEST_CASE("Adam closed-form first step moves each weight by ~lr") {
    // With bias correction, step 1 updates by lr * g/(|g| + eps) ~ lr*sign(g).
    Tensor<double> w({4}), g({4});
    w.values = {1.0, -2.0, 0.5, 3.0};
    g.values = {0.3, -0.7, 0.0001, 2.0};
    std::vector<double> before = w.values;
    std::vector<ParamRef<double>> params{{"w", &w, &g, true}};
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    Adam<double> opt(cfg);
    opt.step(params);
    for (std::size_t i = 0; i < 4; ++i) {
        double expect = before[i] - cfg.learning_rate * g[i] /
                                        (std::abs(g[i]) + cfg.epsilon);
        CHECK(w[i] == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK(opt.step_count() == 1);
}

TEST_CASE("Adam skips non-trainable params and flags non-finite gradients") {
    Tensor<double> w({2}, 1.0), g({2}, 0.5);
    Tensor<double> frozen({2}, 7.0);
    std::vector<ParamRef<double>> params{{"w", &w, &g, true},
                                         {"rm", &frozen, nullptr, false}};
    Adam<double> opt;
    opt.step(params);
    CHECK(frozen.values == std::vector<double>({7.0, 7.0}));
    CHECK(w[0] < 1.0);

    g[1] = std::nan("");
    CHECK_THROWS_AS(opt.step(params), NumericalError);
}

TEST_CASE("identical seeds give identical initialization and dropout masks") {
    std::mt19937 rng_a(42), rng_b(42);
    Conv2d<double> a("c", 3, 4, 8, rng_a), b("c", 3, 4, 8, rng_b);
    CHECK(a.weight().values == b.weight().values);

    Dropout<double> da("d", 0.3), db("d", 0.3);
    Tensor<double> x({1, 256}, 1.0);
    Tensor<double> ya = da.forward(x, Mode::Train, rng_a);
    Tensor<double> yb = db.forward(x, Mode::Train, rng_b);
    CHECK(ya.values == yb.values);
}

TEST_CASE("cross-entropy: one-hot perfect prediction has near-zero loss") {
    Tensor<double> y({2, 3}), yh({2, 3});
    y.at(0, 1) = 1.0;
    y.at(1, 2) = 1.0;
    yh.at(0, 1) = 1.0;
    yh.at(1, 2) = 1.0;
    CHECK(cross_entropy_loss(yh, y) == doctest::Approx(0.0));

    // uniform prediction over C classes costs log C
    Tensor<double> u({1, 4}, 0.25), t({1, 4});
    t.at(0, 0) = 1.0;
    CHECK(cross_entropy_loss(u, t) == doctest::Approx(std::log(4.0)));
}

TEST_CASE("cross-entropy clamps zero predictions instead of producing inf") {
    Tensor<double> y({1, 2}), yh({1, 2});
    y.at(0, 0) = 1.0;
    yh.at(0, 1) = 1.0;  // assigns zero mass to the true class
    double loss = cross_entropy_loss(yh, y);
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(-std::log(kProbFloor)));
}

TEST_CASE("KL mixup loss: exact match leaves only the L2 term") {
    Tensor<double> y({2, 3});
    y.at(0, 0) = 0.3;
    y.at(0, 1) = 0.7;
    y.at(1, 2) = 1.0;
    Tensor<double> w({3});
    w.values = {1.0, -2.0, 0.5};
    Tensor<double> gw({3});
    std::vector<ParamRef<double>> params{{"w", &w, &gw, true}};
    const double lambda = 0.1;
    double loss = kl_mixup_loss(y, y, lambda, params);
    double l2 = 1.0 + 4.0 + 0.25;
    CHECK(loss == doctest::Approx(0.5 * lambda * l2).epsilon(1e-12));
}

TEST_CASE("KL mixup loss is sum-reduced over the batch") {
    Tensor<double> y({1, 2}), yh({1, 2});
    y.at(0, 0) = 1.0;
    yh.at(0, 0) = 0.5;
    yh.at(0, 1) = 0.5;
    double one = kl_mixup_loss(yh, y, 0.0, {});
    Tensor<double> y2({4, 2}), yh2({4, 2});
    for (std::size_t n = 0; n < 4; ++n) {
        y2.at(n, 0) = 1.0;
        yh2.at(n, 0) = 0.5;
        yh2.at(n, 1) = 0.5;
    }
    CHECK(kl_mixup_loss(yh2, y2, 0.0, {}) == doctest::Approx(4.0 * one).epsilon(1e-12));
    CHECK(one == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("add_l2_gradient accumulates lambda*theta after backward") {
    Tensor<double> w({3}), g({3});
    w.values = {2.0, -1.0, 0.0};
    g.values = {0.1, 0.1, 0.1};
    std::vector<ParamRef<double>> params{{"w", &w, &g, true}};
    add_l2_gradient(params, 0.5);
    CHECK(g.values == std::vector<double>({0.1 + 1.0, 0.1 - 0.5, 0.1}));
}
