#include "asc/eval.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "asc/errors.hpp"
#include "json.hpp"

namespace asc {

PredictionSet patch_probabilities(Model<float>& model, const Spectrogram& spec,
                                  const FrontendConfig& cfg, const std::string& recording_id) {
    std::vector<Patch> patches = split_patches(spec, cfg.patch_frames, cfg.patch_overlap,
                                               recording_id);
    std::mt19937 rng(0);  // infer mode draws nothing
    const std::size_t bins = patches.front().values.dim(0);
    const std::size_t frames = patches.front().values.dim(1);
    Tensor<float> batch({patches.size(), bins, frames, 3});
    for (std::size_t i = 0; i < patches.size(); ++i)
        std::copy(patches[i].values.values.begin(), patches[i].values.values.end(),
                  batch.values.begin() + static_cast<long>(i * patches[i].values.numel()));

    Tensor<float> probs = model.forward(batch, Mode::Infer, rng);
    PredictionSet ps;
    ps.recording_id = recording_id;
    for (std::size_t n = 0; n < probs.dim(0); ++n) {
        std::vector<double> row(probs.dim(1));
        for (std::size_t c = 0; c < probs.dim(1); ++c) row[c] = probs.at(n, c);
        ps.probs.push_back(std::move(row));
    }
    return ps;
}

EvalReport build_eval_report(const std::vector<RecordingPrediction>& preds,
                             const std::vector<std::string>& label_set, bool fuse,
                             std::size_t branch_index) {
    if (preds.empty()) throw ValidationError("build_eval_report: no recordings");
    const std::size_t C = label_set.size();

    EvalReport report;
    report.confusion.assign(C, std::vector<std::size_t>(C, 0));
    for (const auto& l : label_set) report.per_class.push_back({l, 0, 0});
    std::map<std::string, ClassStats> devices;

    for (const auto& p : preds) {
        if (p.true_label < 0 || static_cast<std::size_t>(p.true_label) >= C)
            throw ValidationError("build_eval_report: bad label for recording " + p.id);
        std::vector<double> scores;
        if (fuse) {
            if (p.branch_probs.size() < 2)
                throw ValidationError("build_eval_report: fusion needs >= 2 branches");
            FusionInput f;
            f.rows = p.branch_probs;
            scores = prod_fusion(f);
        } else {
            if (branch_index >= p.branch_probs.size())
                throw ValidationError("build_eval_report: branch index out of range");
            scores = p.branch_probs[branch_index];
        }
        const auto pred = predict_label(scores);
        const auto truth = static_cast<std::size_t>(p.true_label);
        report.confusion[truth][pred] += 1;
        report.per_class[truth].total += 1;
        auto& dev = devices[p.device_id.empty() ? "?" : p.device_id];
        dev.label = p.device_id.empty() ? "?" : p.device_id;
        dev.total += 1;
        if (pred == truth) {
            report.per_class[truth].correct += 1;
            dev.correct += 1;
        }
    }

    std::size_t correct = 0;
    for (std::size_t c = 0; c < C; ++c) correct += report.confusion[c][c];
    report.overall_accuracy_pct =
        100.0 * static_cast<double>(correct) / static_cast<double>(preds.size());
    for (auto& [_, stats] : devices) report.per_device.push_back(stats);
    return report;
}

std::string eval_report_to_json(const EvalReport& r, const std::vector<std::string>& label_set) {
    nlohmann::json j;
    j["overall_accuracy_pct"] = r.overall_accuracy_pct;
    j["labels"] = label_set;
    j["confusion"] = r.confusion;
    j["per_class"] = nlohmann::json::array();
    for (const auto& c : r.per_class)
        j["per_class"].push_back({{"label", c.label},
                                  {"correct", c.correct},
                                  {"total", c.total},
                                  {"accuracy_pct", c.accuracy_pct()}});
    j["per_device"] = nlohmann::json::array();
    for (const auto& d : r.per_device)
        j["per_device"].push_back({{"device", d.label},
                                   {"correct", d.correct},
                                   {"total", d.total},
                                   {"accuracy_pct", d.accuracy_pct()}});
    return j.dump(2);
}

std::string eval_report_to_text(const EvalReport& r, const std::vector<std::string>& label_set) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(1);
    os << "Overall accuracy: " << r.overall_accuracy_pct << " %\n\n";

    os << "Per-class accuracy:\n";
    for (const auto& c : r.per_class)
        os << "  " << std::left << std::setw(20) << c.label << std::right << std::setw(6)
           << c.accuracy_pct() << " %  (" << c.correct << "/" << c.total << ")\n";

    os << "\nPer-device accuracy:\n";
    for (const auto& d : r.per_device)
        os << "  " << std::left << std::setw(20) << d.label << std::right << std::setw(6)
           << d.accuracy_pct() << " %  (" << d.correct << "/" << d.total << ")\n";

    os << "\nConfusion matrix (rows = truth, cols = prediction):\n";
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        os << "  " << std::left << std::setw(20) << label_set[i] << std::right;
        for (std::size_t k = 0; k < r.confusion[i].size(); ++k)
            os << std::setw(5) << r.confusion[i][k];
        os << "\n";
    }
    return os.str();
}

}  // namespace asc
