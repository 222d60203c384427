#include "asc/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "asc/errors.hpp"

namespace asc {

const std::vector<std::string>& default_label_set() {
    static const std::vector<std::string> labels = {
        "airport",        "bus",          "metro",
        "metro_station",  "park",         "public_square",
        "shopping_mall",  "street_pedestrian", "street_traffic",
        "tram"};
    return labels;
}

int label_index(const std::vector<std::string>& label_set, const std::string& label) {
    auto it = std::find(label_set.begin(), label_set.end(), label);
    return it == label_set.end() ? -1 : static_cast<int>(it - label_set.begin());
}

namespace {

std::vector<std::string> split_row(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, delim)) out.push_back(field);
    if (!line.empty() && line.back() == delim) out.emplace_back();
    return out;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && s[i] == ' ') ++i;
    return s.substr(i);
}

}  // namespace

std::vector<ManifestEntry> load_manifest(const std::string& path,
                                         const std::vector<std::string>& label_set) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path);

    std::string header;
    if (!std::getline(in, header)) throw ValidationError("manifest " + path + " is empty");

    char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> cols = split_row(header, delim);
    for (auto& c : cols) c = strip(c);

    auto col_of = [&](const std::string& name) -> int {
        auto it = std::find(cols.begin(), cols.end(), name);
        return it == cols.end() ? -1 : static_cast<int>(it - cols.begin());
    };
    int c_file = col_of("filename");
    int c_label = col_of("scene_label");
    int c_device = col_of("device");
    int c_city = col_of("city");
    int c_split = col_of("split");
    if (c_file < 0 || c_label < 0)
        throw ValidationError("manifest " + path +
                              ": header must name filename and scene_label");

    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        std::vector<std::string> f = split_row(line, delim);
        auto field = [&](int i) -> std::string {
            return (i >= 0 && i < static_cast<int>(f.size())) ? strip(f[i]) : "";
        };

        ManifestEntry e;
        e.path = field(c_file);
        e.scene_label = field(c_label);
        e.device_id = field(c_device);
        e.city = field(c_city);
        if (e.path.empty())
            throw ValidationError("manifest " + path + " row " + std::to_string(row) +
                                  ": empty filename");
        if (label_index(label_set, e.scene_label) < 0)
            throw ValidationError("manifest " + path + " row " + std::to_string(row) +
                                  ": unknown scene_label '" + e.scene_label + "'");
        std::string sp = field(c_split);
        if (sp.empty() || sp == "train") {
            e.split = Split::Train;
        } else if (sp == "eval") {
            e.split = Split::Eval;
        } else {
            throw ValidationError("manifest " + path + " row " + std::to_string(row) +
                                  ": split must be train or eval, got '" + sp + "'");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace asc
