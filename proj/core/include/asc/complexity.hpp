#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "asc/model.hpp"

namespace asc {

/// Per-layer trainable-parameter ledger. Byte sizes use exactly 4
/// bytes per parameter (32-bit floats).
struct ComplexityRow {
    std::string name;
    LayerKind kind;
    std::size_t weights = 0;
    std::size_t biases = 0;
    std::size_t bn_params = 0;  // gamma + beta
};

struct ComplexityReport {
    std::vector<ComplexityRow> rows;
    std::string variant;

    std::size_t total_with_bn() const;
    std::size_t total_without_bn() const;
    static double kb(std::size_t params) { return static_cast<double>(params) * 4.0 / 1024.0; }
    double kb_with_bn() const { return kb(total_with_bn()); }
    double kb_without_bn() const { return kb(total_without_bn()); }
};

/// Shape-checks the spec, then counts per-layer trainable parameters:
/// Conv2d = k*k*C_in*C_out + C_out, DecomposedConv2d = (17/16)*C_in*C_out
/// + C_out, BatchNorm = 2*C (running stats excluded), FC = in*out + out.
ComplexityReport count_params(const ModelSpec& spec);

/// Sum of totals over an ensemble, in parameters (use ComplexityReport::kb
/// for the KB figure).
std::size_t ensemble_params(const std::vector<ComplexityReport>& reports, bool include_bn);

std::string complexity_report_to_json(const ComplexityReport& r);
std::string complexity_report_to_text(const ComplexityReport& r);

}  // namespace asc
