#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "asc/layers.hpp"
#include "asc/tensor.hpp"

namespace asc {

enum class LayerKind {
    Conv2d,
    DecomposedConv2d,
    BatchNorm,
    ReLU,
    AvgPool,
    GlobalAvgPool,
    Dropout,
    FullyConnected,
    Softmax,
};

std::string layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& name);

/// Declarative layer description: the single source of truth shared by
/// the executable network builder and the complexity auditor.
struct LayerSpec {
    LayerKind kind = LayerKind::ReLU;
    std::string name;
    std::size_t kernel = 3;     // Conv2d
    std::size_t c_in = 0;       // Conv2d / DecomposedConv2d
    std::size_t c_out = 0;
    std::size_t channels = 0;   // BatchNorm
    double drop_p = 0.0;        // Dropout
    std::size_t in_dim = 0;     // FullyConnected
    std::size_t out_dim = 0;
};

enum class Variant { Baseline, CR, CRDC };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct ModelSpec {
    std::vector<LayerSpec> layers;
    Variant variant = Variant::Baseline;
    std::size_t class_count = 10;
    std::vector<std::size_t> input_shape = {128, 128, 3};  // H x W x C
};

/// Walks the spec over [H,W,C] and returns the output shape after each
/// layer (FC/GAP outputs reported as 1-d). Throws ShapeError on any
/// inconsistency.
std::vector<std::vector<std::size_t>> infer_shapes(const ModelSpec& spec);

/// Executable network built from a ModelSpec.
template <typename T>
class Model {
public:
    Model(const ModelSpec& spec, std::mt19937& rng) : spec_(spec) {
        for (const auto& l : spec.layers) layers_.push_back(make_layer(l, rng));
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode, std::mt19937& rng) {
        Tensor<T> h = x;
        for (auto& l : layers_) h = l->forward(h, mode, rng);
        return h;
    }

    Tensor<T> backward(const Tensor<T>& grad) {
        Tensor<T> g = grad;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
        return g;
    }

    std::vector<ParamRef<T>> params() {
        std::vector<ParamRef<T>> out;
        for (auto& l : layers_)
            for (auto& p : l->params()) out.push_back(p);
        return out;
    }

    std::size_t trainable_count() {
        std::size_t n = 0;
        for (auto& p : params())
            if (p.trainable) n += p.value->numel();
        return n;
    }

    const ModelSpec& spec() const { return spec_; }
    std::vector<std::unique_ptr<Layer<T>>>& layers() { return layers_; }

private:
    static std::unique_ptr<Layer<T>> make_layer(const LayerSpec& l, std::mt19937& rng) {
        switch (l.kind) {
            case LayerKind::Conv2d:
                return std::make_unique<Conv2d<T>>(l.name, l.kernel, l.c_in, l.c_out, rng);
            case LayerKind::DecomposedConv2d:
                return std::make_unique<DecomposedConv2d<T>>(l.name, l.c_in, l.c_out, rng);
            case LayerKind::BatchNorm:
                return std::make_unique<BatchNorm<T>>(l.name, l.channels);
            case LayerKind::ReLU:
                return std::make_unique<ReLU<T>>(l.name);
            case LayerKind::AvgPool:
                return std::make_unique<AvgPool2x2<T>>(l.name);
            case LayerKind::GlobalAvgPool:
                return std::make_unique<GlobalAvgPool<T>>(l.name);
            case LayerKind::Dropout:
                return std::make_unique<Dropout<T>>(l.name, l.drop_p);
            case LayerKind::FullyConnected:
                return std::make_unique<FullyConnected<T>>(l.name, l.in_dim, l.out_dim, rng);
            case LayerKind::Softmax:
                return std::make_unique<Softmax<T>>(l.name);
        }
        throw ValidationError("unknown layer kind in spec");
    }

    ModelSpec spec_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace asc
