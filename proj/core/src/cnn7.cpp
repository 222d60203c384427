#include "asc/cnn7.hpp"

#include <array>

#include "asc/errors.hpp"
#include "json.hpp"

namespace asc {

std::string layer_kind_name(LayerKind k) {
    switch (k) {
        case LayerKind::Conv2d: return "conv2d";
        case LayerKind::DecomposedConv2d: return "decomposed_conv2d";
        case LayerKind::BatchNorm: return "batchnorm";
        case LayerKind::ReLU: return "relu";
        case LayerKind::AvgPool: return "avg_pool";
        case LayerKind::GlobalAvgPool: return "global_avg_pool";
        case LayerKind::Dropout: return "dropout";
        case LayerKind::FullyConnected: return "fully_connected";
        case LayerKind::Softmax: return "softmax";
    }
    return "?";
}

LayerKind layer_kind_from_name(const std::string& name) {
    for (LayerKind k : {LayerKind::Conv2d, LayerKind::DecomposedConv2d, LayerKind::BatchNorm,
                        LayerKind::ReLU, LayerKind::AvgPool, LayerKind::GlobalAvgPool,
                        LayerKind::Dropout, LayerKind::FullyConnected, LayerKind::Softmax})
        if (layer_kind_name(k) == name) return k;
    throw ValidationError("unknown layer kind '" + name + "'");
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Baseline: return "baseline";
        case Variant::CR: return "cr";
        case Variant::CRDC: return "crdc";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "baseline") return Variant::Baseline;
    if (name == "cr") return Variant::CR;
    if (name == "crdc") return Variant::CRDC;
    throw ValidationError("unknown variant '" + name + "' (expected baseline|cr|crdc)");
}

ModelSpec build_cnn7(Variant variant, std::size_t class_count,
                     std::vector<std::size_t> input_shape) {
    if (class_count < 2) throw ValidationError("build_cnn7: class_count must be >= 2");
    const std::array<std::size_t, 6> baseline_ladder = {32, 32, 64, 64, 128, 128};
    const std::array<std::size_t, 6> cr_ladder = {16, 32, 32, 32, 64, 64};
    const auto& ladder = variant == Variant::Baseline ? baseline_ladder : cr_ladder;
    const bool decompose = variant == Variant::CRDC;

    ModelSpec spec;
    spec.variant = variant;
    spec.class_count = class_count;
    spec.input_shape = std::move(input_shape);

    std::size_t c_in = spec.input_shape.at(2);
    for (std::size_t b = 0; b < 6; ++b) {
        const std::size_t c_out = ladder[b];
        const std::string blk = "block" + std::to_string(b + 1);

        spec.layers.push_back({LayerKind::BatchNorm, blk + ".bn_in", 0, 0, 0, c_in});
        LayerSpec conv;
        conv.name = blk + ".conv";
        conv.c_in = c_in;
        conv.c_out = c_out;
        conv.kernel = 3;
        conv.kind = decompose && c_in % 4 == 0 && c_out % 4 == 0
                        ? LayerKind::DecomposedConv2d
                        : LayerKind::Conv2d;
        spec.layers.push_back(conv);
        spec.layers.push_back({LayerKind::ReLU, blk + ".relu"});
        spec.layers.push_back({LayerKind::BatchNorm, blk + ".bn_out", 0, 0, 0, c_out});
        if (b == 1 || b == 3 || b == 4)
            spec.layers.push_back({LayerKind::AvgPool, blk + ".pool"});
        if (b == 5)
            spec.layers.push_back({LayerKind::GlobalAvgPool, blk + ".gap"});
        LayerSpec drop;
        drop.kind = LayerKind::Dropout;
        drop.name = blk + ".drop";
        drop.drop_p = 0.1;
        spec.layers.push_back(drop);
        c_in = c_out;
    }

    LayerSpec fc;
    fc.kind = LayerKind::FullyConnected;
    fc.name = "head.fc";
    fc.in_dim = ladder[5];
    fc.out_dim = class_count;
    spec.layers.push_back(fc);
    spec.layers.push_back({LayerKind::Softmax, "head.softmax"});
    return spec;
}

std::vector<std::vector<std::size_t>> infer_shapes(const ModelSpec& spec) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> s = spec.input_shape;  // H, W, C or flat D
    for (const auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::Conv2d:
            case LayerKind::DecomposedConv2d:
                if (s.size() != 3 || s[2] != l.c_in)
                    throw ShapeError(l.name + ": wants C_in " + std::to_string(l.c_in));
                if (l.kind == LayerKind::DecomposedConv2d &&
                    (l.c_in % 4 != 0 || l.c_out % 4 != 0))
                    throw ValidationError(l.name + ": channels not divisible by 4");
                s[2] = l.c_out;
                break;
            case LayerKind::BatchNorm:
                if (s.back() != l.channels)
                    throw ShapeError(l.name + ": wants " + std::to_string(l.channels) +
                                     " channels, have " + std::to_string(s.back()));
                break;
            case LayerKind::AvgPool:
                if (s.size() != 3) throw ShapeError(l.name + ": needs spatial input");
                s[0] /= 2;
                s[1] /= 2;
                if (s[0] == 0 || s[1] == 0) throw ShapeError(l.name + ": spatial collapse");
                break;
            case LayerKind::GlobalAvgPool:
                if (s.size() != 3) throw ShapeError(l.name + ": needs spatial input");
                s = {s[2]};
                break;
            case LayerKind::FullyConnected:
                if (s.size() != 1 || s[0] != l.in_dim)
                    throw ShapeError(l.name + ": wants flat input of " +
                                     std::to_string(l.in_dim));
                s = {l.out_dim};
                break;
            case LayerKind::ReLU:
            case LayerKind::Dropout:
            case LayerKind::Softmax:
                break;
        }
        out.push_back(s);
    }
    return out;
}

Ratio decomposed_weight_ratio() { return {17, 144}; }

std::size_t decomposed_weight_count(std::size_t c_in, std::size_t c_out) {
    if (c_in % 4 != 0 || c_out % 4 != 0)
        throw ValidationError("decomposed_weight_count: channels must be divisible by 4");
    return 9 * (c_in / 4) * (c_out / 4) + 2 * (c_in / 2) * (c_out / 4) + c_in * (c_out / 4);
}

std::string model_spec_to_json(const ModelSpec& spec) {
    nlohmann::json j;
    j["variant"] = variant_name(spec.variant);
    j["class_count"] = spec.class_count;
    j["input_shape"] = spec.input_shape;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : spec.layers) {
        nlohmann::json jl;
        jl["kind"] = layer_kind_name(l.kind);
        jl["name"] = l.name;
        switch (l.kind) {
            case LayerKind::Conv2d:
                jl["kernel"] = l.kernel;
                [[fallthrough]];
            case LayerKind::DecomposedConv2d:
                jl["c_in"] = l.c_in;
                jl["c_out"] = l.c_out;
                break;
            case LayerKind::BatchNorm:
                jl["channels"] = l.channels;
                break;
            case LayerKind::Dropout:
                jl["p"] = l.drop_p;
                break;
            case LayerKind::FullyConnected:
                jl["in_dim"] = l.in_dim;
                jl["out_dim"] = l.out_dim;
                break;
            default:
                break;
        }
        j["layers"].push_back(jl);
    }
    return j.dump(2);
}

ModelSpec model_spec_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("model spec JSON parse error: ") + e.what());
    }
    ModelSpec spec;
    spec.variant = variant_from_name(j.at("variant").get<std::string>());
    spec.class_count = j.at("class_count").get<std::size_t>();
    spec.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
    for (const auto& jl : j.at("layers")) {
        LayerSpec l;
        l.kind = layer_kind_from_name(jl.at("kind").get<std::string>());
        l.name = jl.at("name").get<std::string>();
        switch (l.kind) {
            case LayerKind::Conv2d:
                l.kernel = jl.at("kernel").get<std::size_t>();
                l.c_in = jl.at("c_in").get<std::size_t>();
                l.c_out = jl.at("c_out").get<std::size_t>();
                break;
            case LayerKind::DecomposedConv2d:
                l.c_in = jl.at("c_in").get<std::size_t>();
                l.c_out = jl.at("c_out").get<std::size_t>();
                break;
            case LayerKind::BatchNorm:
                l.channels = jl.at("channels").get<std::size_t>();
                break;
            case LayerKind::Dropout:
                l.drop_p = jl.at("p").get<double>();
                break;
            case LayerKind::FullyConnected:
                l.in_dim = jl.at("in_dim").get<std::size_t>();
                l.out_dim = jl.at("out_dim").get<std::size_t>();
                break;
            default:
                break;
        }
        spec.layers.push_back(std::move(l));
    }
    return spec;
}

}  // namespace asc
