#pragma once

#include <string>
#include <vector>

#include "asc/model.hpp"

namespace asc {

struct CheckpointTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<float> data;  // little-endian float32 on disk
};

/// Binary container of named parameter tensors plus a JSON header
/// carrying the ModelSpec and a hash of the training config.
struct Checkpoint {
    ModelSpec spec;
    std::string config_hash;
    std::vector<CheckpointTensor> tensors;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// FNV-1a over a canonical string, used to key run directories and
/// checkpoint headers.
std::string fnv1a_hex(const std::string& text);

template <typename T>
Checkpoint checkpoint_from_model(Model<T>& model, const std::string& config_hash) {
    Checkpoint ckpt;
    ckpt.spec = model.spec();
    ckpt.config_hash = config_hash;
    for (const auto& p : model.params()) {
        CheckpointTensor t;
        t.name = p.name;
        t.shape = p.value->shape;
        t.data.reserve(p.value->numel());
        for (auto v : p.value->values) t.data.push_back(static_cast<float>(v));
        ckpt.tensors.push_back(std::move(t));
    }
    return ckpt;
}

template <typename T>
void load_into_model(const Checkpoint& ckpt, Model<T>& model) {
    auto params = model.params();
    if (params.size() != ckpt.tensors.size())
        throw ValidationError("checkpoint: tensor count " + std::to_string(ckpt.tensors.size()) +
                              " does not match model (" + std::to_string(params.size()) + ")");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& t = ckpt.tensors[i];
        if (t.name != params[i].name || t.shape != params[i].value->shape)
            throw ValidationError("checkpoint: tensor '" + t.name + "' does not match model slot '" +
                                  params[i].name + "'");
        for (std::size_t k = 0; k < t.data.size(); ++k)
            params[i].value->values[k] = static_cast<T>(t.data[k]);
    }
}

}  // namespace asc
