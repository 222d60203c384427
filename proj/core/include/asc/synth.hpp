#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/tensor.hpp"

namespace asc {

/// Toy patch corpus: each class occupies a distinct frequency-bin band
/// with additive noise, linearly separable by construction. Used for
/// convergence tests without shipping any real dataset.
struct SyntheticPatchSet {
    std::vector<Tensor<float>> patches;  // [bins x frames x 3]
    std::vector<int> labels;
    std::size_t class_count = 0;
};

SyntheticPatchSet make_synthetic_patches(std::size_t n_patches, std::size_t bins,
                                         std::size_t frames, std::size_t class_count,
                                         std::uint32_t seed);

/// Emits a small WAV corpus (tones in class-distinct bands plus noise)
/// with a tab-separated manifest and the label list. Returns the
/// manifest path.
struct SynthCorpusConfig {
    std::size_t clips_per_class_train = 6;
    std::size_t clips_per_class_eval = 3;
    double seconds = 3.0;
    std::uint32_t sample_rate = 44100;
    std::uint32_t seed = 7;
};

struct SynthCorpus {
    std::string manifest_path;
    std::vector<std::string> labels;
};

SynthCorpus write_synthetic_corpus(const std::string& out_dir, const SynthCorpusConfig& cfg);

}  // namespace asc
