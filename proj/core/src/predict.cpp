#include "asc/predict.hpp"

#include <cmath>

#include "asc/errors.hpp"

namespace asc {

std::vector<double> average_patches(const PredictionSet& ps) {
    if (ps.probs.empty())
        throw ValidationError("average_patches: empty prediction set for recording '" +
                              ps.recording_id + "'");
    const std::size_t C = ps.probs.front().size();
    std::vector<double> mean(C, 0.0);
    for (const auto& row : ps.probs) {
        if (row.size() != C)
            throw ValidationError("average_patches: ragged probability rows");
        for (std::size_t c = 0; c < C; ++c) mean[c] += row[c];
    }
    for (double& v : mean) v /= static_cast<double>(ps.probs.size());
    return mean;
}

std::size_t predict_label(const std::vector<double>& p) {
    if (p.empty()) throw ValidationError("predict_label: empty vector");
    std::size_t best = 0;
    for (std::size_t c = 0; c < p.size(); ++c) {
        if (!std::isfinite(p[c]))
            throw ValidationError("predict_label: non-finite entry at index " +
                                  std::to_string(c));
        if (p[c] > p[best]) best = c;
    }
    return best;
}

std::vector<double> prod_fusion(const FusionInput& f) {
    if (f.rows.empty()) throw ValidationError("prod_fusion: need at least one network");
    const std::size_t C = f.rows.front().size();
    std::vector<double> out(C, 1.0);
    for (const auto& row : f.rows) {
        if (row.size() != C) throw ValidationError("prod_fusion: ragged rows");
        for (std::size_t c = 0; c < C; ++c) {
            if (row[c] < 0.0)
                throw ValidationError("prod_fusion: negative probability " +
                                      std::to_string(row[c]));
            out[c] *= row[c];
        }
    }
    const double scale = 1.0 / static_cast<double>(f.rows.size());
    for (double& v : out) v *= scale;
    return out;
}

}  // namespace asc
