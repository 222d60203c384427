#pragma once

#include <optional>
#include <string>

#include "asc/dsp.hpp"

namespace asc {

/// Binary feature container: magic, kind tag, shape, little-endian
/// float32 values, plus a JSON sidecar (<path>.json) recording the
/// FrontendConfig that produced it. A cache hit requires config
/// equality.
void save_feature_cache(const std::string& path, const Spectrogram& spec,
                        const FrontendConfig& cfg);

Spectrogram load_feature_cache(const std::string& path);

/// True when a cache file exists at `path` and its sidecar matches
/// `cfg` exactly.
bool feature_cache_hit(const std::string& path, const FrontendConfig& cfg);

std::string frontend_config_to_json(const FrontendConfig& cfg);
FrontendConfig frontend_config_from_json(const std::string& json_text);
bool frontend_config_equal(const FrontendConfig& a, const FrontendConfig& b);

}  // namespace asc
