#pragma once

#include <string>
#include <vector>

#include "asc/dsp.hpp"
#include "asc/model.hpp"
#include "asc/predict.hpp"

namespace asc {

/// One evaluated recording: per-branch patch-averaged probabilities plus
/// ground truth metadata. `branch_probs[s]` is the s-th network's
/// averaged probability vector.
struct RecordingPrediction {
    std::string id;
    std::string device_id;
    int true_label = -1;
    std::vector<std::vector<double>> branch_probs;
};

struct ClassStats {
    std::string label;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy_pct() const {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    }
};

struct EvalReport {
    double overall_accuracy_pct = 0.0;
    std::vector<ClassStats> per_class;
    std::vector<ClassStats> per_device;
    std::vector<std::vector<std::size_t>> confusion;  // [true][pred]
};

/// Patch-probability pipeline for one recording: split, batched infer
/// forward, one probability row per patch.
PredictionSet patch_probabilities(Model<float>& model, const Spectrogram& spec,
                                  const FrontendConfig& cfg, const std::string& recording_id);

/// Aggregates recording predictions into a report. With fuse=true the
/// branches are PROD-fused before the argmax; otherwise branch
/// `branch_index` is scored alone.
EvalReport build_eval_report(const std::vector<RecordingPrediction>& preds,
                             const std::vector<std::string>& label_set, bool fuse,
                             std::size_t branch_index = 0);

std::string eval_report_to_json(const EvalReport& r, const std::vector<std::string>& label_set);
std::string eval_report_to_text(const EvalReport& r, const std::vector<std::string>& label_set);

}  // namespace asc
