#pragma once

#include <string>

#include "asc/model.hpp"

namespace asc {

struct Ratio {
    long num;
    long den;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Builds the 6-convolution + 1-FC network as a declarative spec.
/// Each block is BN -> Conv -> ReLU -> BN -> (AvgPool) -> Dropout(0.1),
/// with pooling after blocks 2, 4, 5 and GAP after block 6.
/// CR swaps the channel ladder (32,32,64,64,128,128) -> (16,32,32,32,64,64);
/// CRDC additionally decomposes every convolution whose channel counts
/// are divisible by 4 (all but the first, whose input has 3 channels).
ModelSpec build_cnn7(Variant variant, std::size_t class_count = 10,
                     std::vector<std::size_t> input_shape = {128, 128, 3});

/// Trainable-weight ratio of a decomposed layer against the standard
/// 3x3 layer it replaces: (17/16 * C_in * C_out) / (9 * C_in * C_out)
/// = 17/144, independent of channel sizes.
Ratio decomposed_weight_ratio();

/// Weight count of one decomposed layer (bias excluded):
/// 9*(C_in/4)*(C_out/4) + 2*(C_in/2)*(C_out/4) + C_in*(C_out/4).
std::size_t decomposed_weight_count(std::size_t c_in, std::size_t c_out);

/// JSON round-trip for the spec, used by checkpoint headers and the
/// complexity auditor.
std::string model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const std::string& json_text);

}  // namespace asc
