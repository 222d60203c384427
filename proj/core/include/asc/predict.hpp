#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace asc {

/// Per-patch class probabilities for one recording: probs[n][c].
struct PredictionSet {
    std::vector<std::vector<double>> probs;
    std::string recording_id;
};

/// Per-network averaged probabilities for one recording: rows[s][c].
struct FusionInput {
    std::vector<std::vector<double>> rows;
};

/// Arithmetic mean over patch rows; output stays on the simplex.
std::vector<double> average_patches(const PredictionSet& ps);

/// Lowest index attaining the maximum (deterministic tie-break).
std::size_t predict_label(const std::vector<double>& p);

/// Element-wise product across networks scaled by 1/S. Scores, not
/// probabilities: no renormalization, argmax is scale-invariant.
std::vector<double> prod_fusion(const FusionInput& f);

}  // namespace asc
