#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/augment.hpp"
#include "asc/dsp.hpp"
#include "asc/model.hpp"
#include "asc/train.hpp"

namespace asc {

/// Whole-run configuration mirroring all module configs. Loaded from a
/// JSON file; unknown keys are rejected so typos surface immediately.
struct RunConfig {
    std::uint32_t seed = 1;
    std::uint32_t expected_sample_rate = 44100;
    std::vector<std::string> labels;  // empty = default 10-class set
    std::string data_root = ".";
    std::string features_dir = "features";
    std::string runs_dir = "runs";
    FrontendConfig frontend;
    Variant variant = Variant::CRDC;
    TrainingConfig train;
    MixupConfig mixup;
    SpecAugmentConfig spec_augment;

    const std::vector<std::string>& label_set() const;
};

RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);

/// Stable hash of the resolved config, used to name run directories.
std::string run_config_hash(const RunConfig& cfg);

}  // namespace asc
