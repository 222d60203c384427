#include "asc/complexity.hpp"

#include <iomanip>
#include <sstream>

#include "asc/cnn7.hpp"
#include "json.hpp"

namespace asc {

std::size_t ComplexityReport::total_with_bn() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.weights + r.biases + r.bn_params;
    return n;
}

std::size_t ComplexityReport::total_without_bn() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.weights + r.biases;
    return n;
}

ComplexityReport count_params(const ModelSpec& spec) {
    infer_shapes(spec);  // propagate shape errors before counting
    ComplexityReport report;
    report.variant = variant_name(spec.variant);
    for (const auto& l : spec.layers) {
        ComplexityRow row;
        row.name = l.name;
        row.kind = l.kind;
        switch (l.kind) {
            case LayerKind::Conv2d:
                row.weights = l.kernel * l.kernel * l.c_in * l.c_out;
                row.biases = l.c_out;
                break;
            case LayerKind::DecomposedConv2d:
                row.weights = decomposed_weight_count(l.c_in, l.c_out);
                row.biases = l.c_out;  // one bias per path, C_out/4 each
                break;
            case LayerKind::BatchNorm:
                row.bn_params = 2 * l.channels;
                break;
            case LayerKind::FullyConnected:
                row.weights = l.in_dim * l.out_dim;
                row.biases = l.out_dim;
                break;
            default:
                break;  // activation / pooling / dropout carry nothing
        }
        report.rows.push_back(row);
    }
    return report;
}

std::size_t ensemble_params(const std::vector<ComplexityReport>& reports, bool include_bn) {
    std::size_t n = 0;
    for (const auto& r : reports) n += include_bn ? r.total_with_bn() : r.total_without_bn();
    return n;
}

std::string complexity_report_to_json(const ComplexityReport& r) {
    nlohmann::json j;
    j["variant"] = r.variant;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        j["rows"].push_back({{"name", row.name},
                             {"kind", layer_kind_name(row.kind)},
                             {"weights", row.weights},
                             {"biases", row.biases},
                             {"bn_params", row.bn_params}});
    }
    j["total_params_with_bn"] = r.total_with_bn();
    j["total_params_without_bn"] = r.total_without_bn();
    j["kb_with_bn"] = r.kb_with_bn();
    j["kb_without_bn"] = r.kb_without_bn();
    j["bytes_per_param"] = 4;
    return j.dump(2);
}

std::string complexity_report_to_text(const ComplexityReport& r) {
    std::ostringstream os;
    os << "Complexity report: variant " << r.variant << "\n";
    os << std::left << std::setw(22) << "layer" << std::setw(20) << "kind" << std::right
       << std::setw(10) << "weights" << std::setw(8) << "biases" << std::setw(8) << "bn"
       << "\n";
    for (const auto& row : r.rows) {
        if (row.weights + row.biases + row.bn_params == 0) continue;
        os << std::left << std::setw(22) << row.name << std::setw(20)
           << layer_kind_name(row.kind) << std::right << std::setw(10) << row.weights
           << std::setw(8) << row.biases << std::setw(8) << row.bn_params << "\n";
    }
    os << std::fixed << std::setprecision(1);
    os << "total (incl. BN): " << r.total_with_bn() << " params, " << r.kb_with_bn()
       << " KB at 4 bytes/param\n";
    os << "total (excl. BN): " << r.total_without_bn() << " params, " << r.kb_without_bn()
       << " KB at 4 bytes/param\n";
    return os.str();
}

}  // namespace asc
