#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "asc/augment.hpp"
#include "asc/checkpoint.hpp"
#include "asc/cnn7.hpp"
#include "asc/eval.hpp"
#include "asc/feature_cache.hpp"
#include "asc/losses.hpp"
#include "asc/predict.hpp"
#include "asc/run_config.hpp"
#include "asc/synth.hpp"
#include "asc/train.hpp"

using namespace asc;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
    fs::path d = fs::temp_directory_path() / "asc_test_train_eval";
    fs::create_directories(d);
    return d;
}

// small 3-block stand-in with the same layer vocabulary as the full net;
// keeps the training tests fast
ModelSpec tiny_spec(std::size_t classes = 3, std::size_t side = 16) {
    ModelSpec spec;
    spec.variant = Variant::CR;
    spec.class_count = classes;
    spec.input_shape = {side, side, 3};
    auto add = [&](LayerSpec l) { spec.layers.push_back(std::move(l)); };
    add({.kind = LayerKind::BatchNorm, .name = "bn1a", .channels = 3});
    add({.kind = LayerKind::Conv2d, .name = "conv1", .kernel = 3, .c_in = 3, .c_out = 8});
    add({.kind = LayerKind::ReLU, .name = "relu1"});
    add({.kind = LayerKind::BatchNorm, .name = "bn1b", .channels = 8});
    add({.kind = LayerKind::AvgPool, .name = "pool1"});
    add({.kind = LayerKind::Dropout, .name = "drop1", .drop_p = 0.1});
    add({.kind = LayerKind::DecomposedConv2d, .name = "dconv2", .c_in = 8, .c_out = 8});
    add({.kind = LayerKind::ReLU, .name = "relu2"});
    add({.kind = LayerKind::GlobalAvgPool, .name = "gap"});
    add({.kind = LayerKind::FullyConnected, .name = "fc", .in_dim = 8, .out_dim = classes});
    add({.kind = LayerKind::Softmax, .name = "softmax"});
    return spec;
}

}  // namespace

TEST_CASE("loss identity: one-hot KL with lambda=0 equals N times mean cross-entropy") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> d(0.1, 1.0);
    const std::size_t N = 5, C = 4;
    Tensor<double> yh({N, C}), y({N, C});
    for (std::size_t n = 0; n < N; ++n) {
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            yh.at(n, c) = d(rng);
            sum += yh.at(n, c);
        }
        for (std::size_t c = 0; c < C; ++c) yh.at(n, c) /= sum;
        y.at(n, n % C) = 1.0;
    }
    double ce = cross_entropy_loss(yh, y);
    double kl = kl_mixup_loss(yh, y, 0.0, {});
    CHECK(kl == doctest::Approx(double(N) * ce).epsilon(1e-10));
}

TEST_CASE("mixup lambda stays in [0,1] and mixed labels stay on the simplex") {
    std::mt19937 rng(2);
    for (int i = 0; i < 2000; ++i) {
        double lam = sample_mixup_lambda(0.4, rng);
        CHECK(lam >= 0.0);
        CHECK(lam <= 1.0);
    }
    Tensor<float> x1({2, 2, 2, 1}, 1.0f), x2({2, 2, 2, 1}, 3.0f);
    Tensor<float> y1({2, 3}), y2({2, 3});
    y1.at(0, 0) = 1.0f;
    y1.at(1, 1) = 1.0f;
    y2.at(0, 2) = 1.0f;
    y2.at(1, 2) = 1.0f;
    Tensor<float> xm, ym;
    mixup_batch(x1, x2, y1, y2, 0.25, xm, ym);
    for (float v : xm.values) CHECK(v == doctest::Approx(0.25 * 1.0 + 0.75 * 3.0));
    for (std::size_t n = 0; n < 2; ++n) {
        double sum = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(ym.at(n, c) >= 0.0f);
            sum += ym.at(n, c);
        }
        CHECK(sum == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(mixup_batch(x1, x2, y1, y2, 1.5, xm, ym), ValidationError);
}

TEST_CASE("mixup at the endpoints reproduces the inputs") {
    Tensor<float> x1({1, 2, 2, 1}, 2.0f), x2({1, 2, 2, 1}, -1.0f);
    Tensor<float> y1({1, 2}), y2({1, 2});
    y1.at(0, 0) = 1.0f;
    y2.at(0, 1) = 1.0f;
    Tensor<float> xm, ym;
    mixup_batch(x1, x2, y1, y2, 1.0, xm, ym);
    CHECK(xm.values == x1.values);
    CHECK(ym.values == y1.values);
    mixup_batch(x1, x2, y1, y2, 0.0, xm, ym);
    CHECK(xm.values == x2.values);
    CHECK(ym.values == y2.values);
}

TEST_CASE("spectrum masking zeroes whole bands across all channels") {
    std::mt19937 rng(3);
    SpecAugmentConfig cfg;
    cfg.n_time_masks = 1;
    cfg.n_freq_masks = 1;
    cfg.max_time_width = 5;
    cfg.max_freq_width = 5;
    Tensor<float> patch({32, 40, 3}, 1.0f);
    spec_augment_inplace(patch, cfg, rng);

    // every zero must belong to a fully-zeroed row or column
    std::vector<bool> row_zero(32, true), col_zero(40, true);
    for (std::size_t b = 0; b < 32; ++b)
        for (std::size_t t = 0; t < 40; ++t)
            for (std::size_t c = 0; c < 3; ++c)
                if (patch.at(b, t, c) != 0.0f) {
                    row_zero[b] = false;
                    col_zero[t] = false;
                }
    std::size_t zero_rows = 0, zero_cols = 0;
    for (bool z : row_zero) zero_rows += z;
    for (bool z : col_zero) zero_cols += z;
    CHECK(zero_rows <= cfg.max_freq_width);
    CHECK(zero_cols <= cfg.max_time_width);
    for (std::size_t b = 0; b < 32; ++b)
        for (std::size_t t = 0; t < 40; ++t)
            for (std::size_t c = 0; c < 3; ++c)
                if (patch.at(b, t, c) == 0.0f) CHECK((row_zero[b] || col_zero[t]));

    SUBCASE("disabled config is a no-op") {
        Tensor<float> p2({16, 16, 3}, 2.0f);
        SpecAugmentConfig off;
        off.enabled = false;
        spec_augment_inplace(p2, off, rng);
        for (float v : p2.values) CHECK(v == 2.0f);
    }

    SUBCASE("mask wider than the patch is rejected") {
        Tensor<float> small({8, 8, 3}, 1.0f);
        SpecAugmentConfig wide;
        wide.max_freq_width = 8;
        CHECK_THROWS_AS(spec_augment_inplace(small, wide, rng), ValidationError);
    }
}

TEST_CASE("patch averaging and argmax") {
    PredictionSet ps;
    ps.probs = {{0.8, 0.1, 0.1}, {0.2, 0.6, 0.2}, {0.2, 0.2, 0.6}};
    auto avg = average_patches(ps);
    CHECK(avg[0] == doctest::Approx(0.4));
    CHECK(avg[1] == doctest::Approx(0.3));
    CHECK(avg[2] == doctest::Approx(0.3));
    double sum = avg[0] + avg[1] + avg[2];
    CHECK(sum == doctest::Approx(1.0));
    CHECK(predict_label(avg) == 0);
    CHECK(predict_label({0.3, 0.4, 0.4}) == 1);  // lowest index wins the tie
    CHECK_THROWS_AS(average_patches(PredictionSet{}), ValidationError);
}

TEST_CASE("product fusion properties") {
    FusionInput f;
    f.rows = {{0.5, 0.3, 0.2}, {0.1, 0.8, 0.1}, {0.3, 0.5, 0.2}};
    auto fused = prod_fusion(f);
    REQUIRE(fused.size() == 3);
    for (std::size_t c = 0; c < 3; ++c)
        CHECK(fused[c] ==
              doctest::Approx(f.rows[0][c] * f.rows[1][c] * f.rows[2][c] / 3.0).epsilon(1e-12));

    SUBCASE("argmax is invariant to per-network positive rescaling") {
        FusionInput g = f;
        for (auto& v : g.rows[1]) v *= 7.0;
        auto a = prod_fusion(f), b = prod_fusion(g);
        CHECK(predict_label(a) == predict_label(b));
    }

    SUBCASE("a single confident branch can flip the unanimous runner-up") {
        FusionInput g;
        g.rows = {{0.45, 0.55}, {0.45, 0.55}, {0.98, 0.02}};
        CHECK(predict_label(prod_fusion(g)) == 0);
    }

    SUBCASE("negative scores are rejected") {
        FusionInput g;
        g.rows = {{0.5, -0.1}};
        CHECK_THROWS_AS(prod_fusion(g), ValidationError);
    }
}

TEST_CASE("eval report: overall accuracy equals the confusion-matrix trace ratio") {
    std::vector<std::string> labels{"a", "b", "c"};
    std::vector<RecordingPrediction> preds;
    auto rec = [&](int truth, std::vector<double> p, const std::string& dev) {
        RecordingPrediction r;
        r.id = "r" + std::to_string(preds.size());
        r.device_id = dev;
        r.true_label = truth;
        r.branch_probs = {std::move(p)};
        preds.push_back(std::move(r));
    };
    rec(0, {0.7, 0.2, 0.1}, "A");   // correct
    rec(0, {0.2, 0.7, 0.1}, "A");   // wrong
    rec(1, {0.1, 0.8, 0.1}, "B");   // correct
    rec(2, {0.1, 0.2, 0.7}, "B");   // correct
    rec(2, {0.5, 0.3, 0.2}, "A");   // wrong

    EvalReport r = build_eval_report(preds, labels, /*fuse=*/false, 0);
    CHECK(r.overall_accuracy_pct == doctest::Approx(60.0));

    std::size_t trace = 0, total = 0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            total += r.confusion[i][j];
            if (i == j) trace += r.confusion[i][j];
        }
    CHECK(total == preds.size());
    CHECK(100.0 * double(trace) / double(total) == doctest::Approx(r.overall_accuracy_pct));

    // per-class totals cover every recording exactly once
    std::size_t class_total = 0, class_correct = 0;
    for (const auto& cs : r.per_class) {
        class_total += cs.total;
        class_correct += cs.correct;
    }
    CHECK(class_total == preds.size());
    CHECK(class_correct == trace);

    std::size_t dev_total = 0;
    for (const auto& ds : r.per_device) dev_total += ds.total;
    CHECK(dev_total == preds.size());

    SUBCASE("fused report uses the product across branches") {
        for (auto& p : preds) p.branch_probs.push_back({0.9, 0.05, 0.05});
        EvalReport rf = build_eval_report(preds, labels, /*fuse=*/true);
        // the confident extra branch drags every prediction toward class 0
        CHECK(rf.confusion[0][0] == 2);
    }

    SUBCASE("JSON emitter carries the confusion matrix and accuracy") {
        std::string js = eval_report_to_json(r, labels);
        CHECK(js.find("overall_accuracy_pct") != std::string::npos);
        CHECK(js.find("confusion") != std::string::npos);
    }
}

TEST_CASE("feature cache round trip and config-equality hit test") {
    fs::path p = tmp_dir() / "feat.bin";
    FrontendConfig cfg;
    cfg.kind = FrontendKind::Gammatone;
    Spectrogram spec;
    spec.kind = cfg.kind;
    spec.values = Tensor<float>({8, 12, 3});
    std::mt19937 rng(4);
    std::uniform_real_distribution<float> d(-2.0f, 2.0f);
    for (auto& v : spec.values.values) v = d(rng);

    save_feature_cache(p.string(), spec, cfg);
    Spectrogram back = load_feature_cache(p.string());
    CHECK(back.kind == spec.kind);
    REQUIRE(back.values.shape == spec.values.shape);
    CHECK(back.values.values == spec.values.values);

    CHECK(feature_cache_hit(p.string(), cfg));
    FrontendConfig other = cfg;
    other.hop_size += 1;
    CHECK_FALSE(feature_cache_hit(p.string(), other));
    CHECK_FALSE(feature_cache_hit((tmp_dir() / "absent.bin").string(), cfg));

    // truncated payloads are detected
    fs::resize_file(p, fs::file_size(p) / 2);
    CHECK_THROWS_AS(load_feature_cache(p.string()), IoError);
}

TEST_CASE("frontend config JSON round trip") {
    FrontendConfig cfg;
    cfg.kind = FrontendKind::Cqt;
    cfg.n_bins = 96;
    cfg.cqt_f_min = 55.0;
    FrontendConfig back = frontend_config_from_json(frontend_config_to_json(cfg));
    CHECK(frontend_config_equal(cfg, back));
    back.patch_overlap = 0.25;
    CHECK_FALSE(frontend_config_equal(cfg, back));
}

TEST_CASE("checkpoint round trip reproduces the model bit-for-bit") {
    std::mt19937 rng(5);
    ModelSpec spec = tiny_spec();
    Model<float> model(spec, rng);

    // push the batch norms off their init so running stats travel too
    SyntheticPatchSet data = make_synthetic_patches(8, 16, 16, 3, 11);
    Tensor<float> x({8, 16, 16, 3});
    for (std::size_t n = 0; n < 8; ++n)
        std::copy(data.patches[n].values.begin(), data.patches[n].values.end(),
                  x.values.begin() + long(n) * long(data.patches[n].numel()));
    model.forward(x, Mode::Train, rng);

    fs::path p = tmp_dir() / "model.ckpt";
    Checkpoint ckpt = checkpoint_from_model(model, fnv1a_hex("cfg"));
    save_checkpoint(p.string(), ckpt);
    Checkpoint loaded = load_checkpoint(p.string());
    CHECK(loaded.config_hash == ckpt.config_hash);
    CHECK(loaded.spec.variant == spec.variant);

    std::mt19937 rng2(999);
    Model<float> fresh(loaded.spec, rng2);
    load_into_model(loaded, fresh);
    Tensor<float> ya = model.forward(x, Mode::Infer, rng);
    Tensor<float> yb = fresh.forward(x, Mode::Infer, rng2);
    CHECK(ya.values == yb.values);

    SUBCASE("mismatched architecture is rejected") {
        std::mt19937 rng3(1);
        Model<float> other(tiny_spec(4), rng3);
        CHECK_THROWS_AS(load_into_model(loaded, other), ValidationError);
    }

    SUBCASE("corrupted magic is rejected") {
        std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
        f.close();
        CHECK_THROWS_AS(load_checkpoint(p.string()), IoError);
    }
}

TEST_CASE("run config: load, unknown keys, hash stability") {
    fs::path p = tmp_dir() / "run.json";
    std::ofstream(p) << R"({
        "seed": 9,
        "frontend": {"n_bins": 64, "patch_frames": 64},
        "model": {"variant": "cr"},
        "train": {"epochs": 3, "learning_rate": 0.01, "stop_at_train_acc": 95.0}
    })";
    RunConfig cfg = load_run_config(p.string());
    CHECK(cfg.seed == 9);
    CHECK(cfg.frontend.n_bins == 64);
    CHECK(cfg.variant == Variant::CR);
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.seed == 9);  // inherits the top-level seed
    CHECK(cfg.train.stop_at_train_acc == 95.0);
    CHECK(cfg.label_set().size() == 10);

    CHECK(run_config_hash(cfg) == run_config_hash(cfg));
    RunConfig other = cfg;
    other.train.learning_rate = 0.02;
    CHECK(run_config_hash(cfg) != run_config_hash(other));

    SUBCASE("unknown keys are rejected with the key name") {
        fs::path bad = tmp_dir() / "bad.json";
        std::ofstream(bad) << R"({"frontend": {"n_binz": 64}})";
        try {
            load_run_config(bad.string());
            FAIL("expected rejection");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("n_binz") != std::string::npos);
        }
    }

    SUBCASE("class_count disagreeing with the label set is rejected") {
        fs::path bad = tmp_dir() / "bad2.json";
        std::ofstream(bad) << R"({"labels": ["x", "y"], "model": {"class_count": 3}})";
        CHECK_THROWS_AS(load_run_config(bad.string()), ValidationError);
    }
}

TEST_CASE("zero learning rate leaves every parameter untouched") {
    std::mt19937 rng(6);
    Model<float> model(tiny_spec(), rng);
    auto params = model.params();
    std::vector<std::vector<float>> before;
    for (auto& p : params) before.push_back(p.value->values);

    SyntheticPatchSet data = make_synthetic_patches(12, 16, 16, 3, 21);
    TrainingConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 0.0;
    cfg.lambda = 0.0;
    cfg.batch_size = 4;
    cfg.loss = LossKind::CrossEntropy;
    train_model(model, data.patches, data.labels, 3, cfg, {}, {});
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;  // batch-norm running stats do move
        INFO(params[i].name);
        CHECK(params[i].value->values == before[i]);
    }
}

TEST_CASE("training is deterministic under a fixed seed") {
    SyntheticPatchSet data = make_synthetic_patches(16, 16, 16, 3, 31);
    TrainingConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 77;
    MixupConfig mixup;
    SpecAugmentConfig spec_aug;
    spec_aug.max_time_width = 4;
    spec_aug.max_freq_width = 4;
    auto run = [&]() {
        std::mt19937 rng(42);
        Model<float> model(tiny_spec(), rng);
        return train_model(model, data.patches, data.labels, 3, cfg, mixup, spec_aug);
    };
    TrainResult a = run(), b = run();
    CHECK(a.epoch_loss == b.epoch_loss);
    CHECK(a.epoch_acc == b.epoch_acc);

    cfg.seed = 78;
    TrainResult c = run();
    CHECK(a.epoch_loss != c.epoch_loss);  // different shuffle/augment draws
}

TEST_CASE("KL-path training drives the loss down on separable data") {
    std::mt19937 rng(8);
    Model<float> model(tiny_spec(), rng);
    SyntheticPatchSet data = make_synthetic_patches(24, 16, 16, 3, 41);
    TrainingConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 8;
    cfg.loss = LossKind::KLMixup;
    MixupConfig mixup;
    SpecAugmentConfig spec_aug;
    spec_aug.max_time_width = 4;
    spec_aug.max_freq_width = 4;
    TrainResult r = train_model(model, data.patches, data.labels, 3, cfg, mixup, spec_aug);
    REQUIRE(r.epoch_loss.size() == 20);
    // mixup resamples lambda every batch, so epoch losses are noisy;
    // compare first-third vs last-third means
    auto mean = [](auto first, auto last) {
        return std::accumulate(first, last, 0.0) / double(std::distance(first, last));
    };
    CHECK(mean(r.epoch_loss.end() - 6, r.epoch_loss.end()) <
          mean(r.epoch_loss.begin(), r.epoch_loss.begin() + 6));
    for (double l : r.epoch_loss) CHECK(std::isfinite(l));
}

TEST_CASE("early stop halts once the accuracy target is reached") {
    std::mt19937 rng(9);
    Model<float> model(tiny_spec(), rng);
    SyntheticPatchSet data = make_synthetic_patches(24, 16, 16, 3, 51);
    TrainingConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 8;
    cfg.loss = LossKind::CrossEntropy;
    cfg.stop_at_train_acc = 80.0;
    TrainResult r = train_model(model, data.patches, data.labels, 3, cfg, {}, {});
    CHECK(r.epoch_acc.size() < 200);
    CHECK(r.epoch_acc.back() >= 80.0);
}

TEST_CASE("loss curve CSV carries one row per epoch") {
    TrainResult r;
    r.epoch_loss = {1.5, 0.9, 0.4};
    r.epoch_acc = {40.0, 70.0, 95.0};
    fs::path p = tmp_dir() / "loss.csv";
    write_loss_curve_csv(p.string(), r);
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,mean_loss,train_acc");
    std::size_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("synthetic patches are class-separable and well-formed") {
    SyntheticPatchSet data = make_synthetic_patches(30, 32, 32, 3, 61);
    REQUIRE(data.patches.size() == 30);
    REQUIRE(data.labels.size() == 30);
    CHECK(data.class_count == 3);
    std::vector<std::size_t> counts(3, 0);
    for (int l : data.labels) {
        REQUIRE(l >= 0);
        REQUIRE(l < 3);
        ++counts[std::size_t(l)];
    }
    for (std::size_t c = 0; c < 3; ++c) CHECK(counts[c] >= 9);
    for (const auto& p : data.patches) {
        CHECK(p.shape == std::vector<std::size_t>({32, 32, 3}));
        CHECK(p.all_finite());
    }
}

TEST_CASE("patch probabilities: one simplex row per patch of a recording") {
    std::mt19937 rng(10);
    ModelSpec spec = tiny_spec(3, 16);
    Model<float> model(spec, rng);
    FrontendConfig cfg;
    cfg.patch_frames = 16;
    cfg.patch_overlap = 0.5;
    Spectrogram spec_in;
    spec_in.values = Tensor<float>({16, 40, 3});
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    for (auto& v : spec_in.values.values) v = d(rng);

    PredictionSet ps = patch_probabilities(model, spec_in, cfg, "rec1");
    CHECK(ps.recording_id == "rec1");
    REQUIRE(ps.probs.size() == 4);  // frames 0,8,16,24 fit; 32 would overrun
    for (const auto& row : ps.probs) {
        REQUIRE(row.size() == 3);
        double sum = 0.0;
        for (double v : row) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-4));
    }
}
