#include "asc/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "asc/errors.hpp"
#include "asc/losses.hpp"
#include "asc/predict.hpp"

namespace asc {

std::string loss_kind_name(LossKind k) {
    return k == LossKind::CrossEntropy ? "cross_entropy" : "kl_mixup";
}

LossKind loss_kind_from_name(const std::string& name) {
    if (name == "cross_entropy") return LossKind::CrossEntropy;
    if (name == "kl_mixup") return LossKind::KLMixup;
    throw ValidationError("unknown loss kind '" + name + "'");
}

namespace {

Tensor<float> assemble_batch(const std::vector<Tensor<float>>& patches,
                             const std::vector<std::size_t>& idx, std::size_t lo,
                             std::size_t hi) {
    const auto& s = patches[idx[lo]].shape;
    Tensor<float> batch({hi - lo, s[0], s[1], s[2]});
    for (std::size_t i = lo; i < hi; ++i) {
        const auto& p = patches[idx[i]];
        std::copy(p.values.begin(), p.values.end(),
                  batch.values.begin() + static_cast<long>((i - lo) * p.numel()));
    }
    return batch;
}

Tensor<float> one_hot_batch(const std::vector<int>& labels,
                            const std::vector<std::size_t>& idx, std::size_t lo,
                            std::size_t hi, std::size_t class_count) {
    Tensor<float> y({hi - lo, class_count});
    for (std::size_t i = lo; i < hi; ++i)
        y.at(i - lo, static_cast<std::size_t>(labels[idx[i]])) = 1.0f;
    return y;
}

}  // namespace

double training_accuracy(Model<float>& model, const std::vector<Tensor<float>>& patches,
                         const std::vector<int>& labels, std::size_t batch_size) {
    std::mt19937 rng(0);  // unused in infer mode
    std::size_t correct = 0;
    std::vector<std::size_t> idx(patches.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t lo = 0; lo < patches.size(); lo += batch_size) {
        std::size_t hi = std::min(lo + batch_size, patches.size());
        Tensor<float> x = assemble_batch(patches, idx, lo, hi);
        Tensor<float> y = model.forward(x, Mode::Infer, rng);
        for (std::size_t n = 0; n < hi - lo; ++n) {
            std::vector<double> row(y.dim(1));
            for (std::size_t c = 0; c < y.dim(1); ++c) row[c] = y.at(n, c);
            if (static_cast<int>(predict_label(row)) == labels[idx[lo + n]]) ++correct;
        }
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(patches.size());
}

TrainResult train_model(Model<float>& model, const std::vector<Tensor<float>>& patches,
                        const std::vector<int>& labels, std::size_t class_count,
                        const TrainingConfig& cfg, const MixupConfig& mixup,
                        const SpecAugmentConfig& spec_aug) {
    if (patches.empty()) throw ValidationError("train: empty dataset");
    if (patches.size() != labels.size())
        throw ValidationError("train: patch/label count mismatch");
    if (cfg.epochs < 1) throw ValidationError("train: epochs must be >= 1");

    std::mt19937 rng(cfg.seed);
    Adam<float> optimizer({cfg.learning_rate});
    const bool use_mixup = cfg.loss == LossKind::KLMixup && mixup.enabled;
    const bool use_specaug = cfg.loss == LossKind::KLMixup && spec_aug.enabled;

    TrainResult result;
    std::vector<std::size_t> idx(patches.size());
    std::iota(idx.begin(), idx.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t lo = 0; lo < patches.size(); lo += cfg.batch_size) {
            const std::size_t hi = std::min(lo + cfg.batch_size, patches.size());
            const std::size_t B = hi - lo;
            Tensor<float> x = assemble_batch(patches, idx, lo, hi);
            Tensor<float> y = one_hot_batch(labels, idx, lo, hi, class_count);

            if (use_specaug) {
                for (std::size_t n = 0; n < B; ++n) {
                    Tensor<float> view({x.dim(1), x.dim(2), x.dim(3)});
                    std::copy(x.values.begin() + static_cast<long>(n * view.numel()),
                              x.values.begin() + static_cast<long>((n + 1) * view.numel()),
                              view.values.begin());
                    spec_augment_inplace(view, spec_aug, rng);
                    std::copy(view.values.begin(), view.values.end(),
                              x.values.begin() + static_cast<long>(n * view.numel()));
                }
            }

            if (use_mixup) {
                std::vector<std::size_t> perm(B);
                std::iota(perm.begin(), perm.end(), 0);
                std::shuffle(perm.begin(), perm.end(), rng);
                Tensor<float> x2(x.shape), y2(y.shape);
                const std::size_t pn = x.numel() / B;
                for (std::size_t n = 0; n < B; ++n) {
                    std::copy(x.values.begin() + static_cast<long>(perm[n] * pn),
                              x.values.begin() + static_cast<long>((perm[n] + 1) * pn),
                              x2.values.begin() + static_cast<long>(n * pn));
                    for (std::size_t c = 0; c < class_count; ++c)
                        y2.at(n, c) = y.at(perm[n], c);
                }
                double lam = sample_mixup_lambda(mixup.alpha, rng);
                Tensor<float> xm, ym;
                mixup_batch(x, x2, y, y2, lam, xm, ym);
                x = std::move(xm);
                y = std::move(ym);
            }

            Tensor<float> y_hat = model.forward(x, Mode::Train, rng);
            Tensor<float> grad;
            double loss;
            auto params = model.params();
            if (cfg.loss == LossKind::KLMixup) {
                loss = kl_mixup_loss(y_hat, y, cfg.lambda, params, &grad);
            } else {
                loss = cross_entropy_loss(y_hat, y, &grad);
            }
            if (!std::isfinite(loss))
                throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batches));
            model.backward(grad);
            if (cfg.loss == LossKind::KLMixup) add_l2_gradient(params, cfg.lambda);
            optimizer.step(params);
            loss_sum += loss;
            ++batches;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
        result.epoch_acc.push_back(
            training_accuracy(model, patches, labels, cfg.batch_size));
        if (cfg.stop_at_train_acc > 0.0 && result.epoch_acc.back() >= cfg.stop_at_train_acc)
            break;
    }
    return result;
}

void write_loss_curve_csv(const std::string& path, const TrainResult& result) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write loss curve " + path);
    out << "epoch,mean_loss,train_acc\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        out << e + 1 << "," << result.epoch_loss[e] << "," << result.epoch_acc[e] << "\n";
}

}  // namespace asc
