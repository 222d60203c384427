#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/adam.hpp"
#include "asc/augment.hpp"
#include "asc/model.hpp"

namespace asc {

enum class LossKind { CrossEntropy, KLMixup };

std::string loss_kind_name(LossKind k);
LossKind loss_kind_from_name(const std::string& name);

struct TrainingConfig {
    std::size_t epochs = 100;
    double lambda = 1e-4;        // L2 coefficient of the KL loss
    double learning_rate = 1e-3;
    std::size_t batch_size = 32;
    LossKind loss = LossKind::KLMixup;
    std::uint32_t seed = 1;
    double stop_at_train_acc = 0.0;  // %, 0 = never stop early
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean loss per epoch
    std::vector<double> epoch_acc;   // clean training accuracy per epoch, in %
};

/// Trains on per-patch samples: each patch is an independent training
/// sample carrying its recording's label. Mixup (same-batch permutation
/// pairing) and spectrum masking apply only on the KL-loss path.
/// Deterministic under a fixed seed; aborts with diagnostics on a
/// non-finite loss.
TrainResult train_model(Model<float>& model, const std::vector<Tensor<float>>& patches,
                        const std::vector<int>& labels, std::size_t class_count,
                        const TrainingConfig& cfg, const MixupConfig& mixup,
                        const SpecAugmentConfig& spec_aug);

/// Clean (no augmentation, infer mode) accuracy in %, batched forward.
double training_accuracy(Model<float>& model, const std::vector<Tensor<float>>& patches,
                         const std::vector<int>& labels, std::size_t batch_size);

void write_loss_curve_csv(const std::string& path, const TrainResult& result);

}  // namespace asc
