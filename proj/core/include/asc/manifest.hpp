#pragma once

#include <string>
#include <vector>

namespace asc {

enum class Split { Train, Eval };

struct ManifestEntry {
    std::string path;         // relative audio file path
    std::string scene_label;
    std::string device_id;    // "A", "S4", ... may be empty
    std::string city;
    Split split = Split::Train;
};

/// The ten scene classes of the common urban-scene taxonomy.
const std::vector<std::string>& default_label_set();

/// Parses a delimited manifest with a header row naming at least
/// `filename` and `scene_label` (optional `device`, `city`, `split`).
/// Delimiter is auto-detected from the header: tab preferred, comma
/// fallback. Rows with labels outside `label_set` are rejected with the
/// offending row number.
std::vector<ManifestEntry> load_manifest(const std::string& path,
                                         const std::vector<std::string>& label_set);

int label_index(const std::vector<std::string>& label_set, const std::string& label);

}  // namespace asc
