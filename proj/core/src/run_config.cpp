#include "asc/run_config.hpp"

#include <fstream>
#include <set>

#include "asc/checkpoint.hpp"
#include "asc/errors.hpp"
#include "asc/manifest.hpp"
#include "json.hpp"

namespace asc {

const std::vector<std::string>& RunConfig::label_set() const {
    return labels.empty() ? default_label_set() : labels;
}

namespace {

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known,
                    const std::string& where) {
    for (const auto& [key, _] : j.items())
        if (!known.contains(key))
            throw ValidationError("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }

    reject_unknown(j, {"seed", "expected_sample_rate", "labels", "paths", "frontend", "model",
                       "train", "augment"},
                   "top level");

    RunConfig cfg;
    maybe(j, "seed", cfg.seed);
    maybe(j, "expected_sample_rate", cfg.expected_sample_rate);
    maybe(j, "labels", cfg.labels);

    if (j.contains("paths")) {
        const auto& jp = j["paths"];
        reject_unknown(jp, {"data_root", "features", "runs"}, "paths");
        maybe(jp, "data_root", cfg.data_root);
        maybe(jp, "features", cfg.features_dir);
        maybe(jp, "runs", cfg.runs_dir);
    }

    if (j.contains("frontend")) {
        const auto& jf = j["frontend"];
        reject_unknown(jf,
                       {"fft_size", "window_size", "hop_size", "n_bins", "log_floor",
                        "delta_width", "cqt_bins_per_octave", "cqt_f_min", "patch_frames",
                        "patch_overlap"},
                       "frontend");
        maybe(jf, "fft_size", cfg.frontend.fft_size);
        maybe(jf, "window_size", cfg.frontend.window_size);
        maybe(jf, "hop_size", cfg.frontend.hop_size);
        maybe(jf, "n_bins", cfg.frontend.n_bins);
        maybe(jf, "log_floor", cfg.frontend.log_floor);
        maybe(jf, "delta_width", cfg.frontend.delta_width);
        maybe(jf, "cqt_bins_per_octave", cfg.frontend.cqt_bins_per_octave);
        maybe(jf, "cqt_f_min", cfg.frontend.cqt_f_min);
        maybe(jf, "patch_frames", cfg.frontend.patch_frames);
        maybe(jf, "patch_overlap", cfg.frontend.patch_overlap);
    }

    if (j.contains("model")) {
        const auto& jm = j["model"];
        reject_unknown(jm, {"variant", "class_count"}, "model");
        if (jm.contains("variant")) cfg.variant = variant_from_name(jm["variant"]);
        // class_count follows the label set; an explicit value must agree.
        if (jm.contains("class_count")) {
            std::size_t cc = jm["class_count"].get<std::size_t>();
            if (cc != cfg.label_set().size())
                throw ValidationError("config: class_count " + std::to_string(cc) +
                                      " does not match label set of " +
                                      std::to_string(cfg.label_set().size()));
        }
    }

    cfg.train.seed = cfg.seed;
    if (j.contains("train")) {
        const auto& jt = j["train"];
        reject_unknown(jt,
                       {"epochs", "lambda", "learning_rate", "batch_size", "loss", "seed",
                        "stop_at_train_acc"},
                       "train");
        maybe(jt, "epochs", cfg.train.epochs);
        maybe(jt, "lambda", cfg.train.lambda);
        maybe(jt, "learning_rate", cfg.train.learning_rate);
        maybe(jt, "batch_size", cfg.train.batch_size);
        if (jt.contains("loss")) cfg.train.loss = loss_kind_from_name(jt["loss"]);
        maybe(jt, "seed", cfg.train.seed);
        maybe(jt, "stop_at_train_acc", cfg.train.stop_at_train_acc);
    }

    if (j.contains("augment")) {
        const auto& ja = j["augment"];
        reject_unknown(ja, {"mixup", "specaugment"}, "augment");
        if (ja.contains("mixup")) {
            const auto& jm = ja["mixup"];
            reject_unknown(jm, {"enabled", "alpha"}, "augment.mixup");
            maybe(jm, "enabled", cfg.mixup.enabled);
            maybe(jm, "alpha", cfg.mixup.alpha);
        }
        if (ja.contains("specaugment")) {
            const auto& js = ja["specaugment"];
            reject_unknown(js,
                           {"enabled", "n_time_masks", "max_time_width", "n_freq_masks",
                            "max_freq_width"},
                           "augment.specaugment");
            maybe(js, "enabled", cfg.spec_augment.enabled);
            maybe(js, "n_time_masks", cfg.spec_augment.n_time_masks);
            maybe(js, "max_time_width", cfg.spec_augment.max_time_width);
            maybe(js, "n_freq_masks", cfg.spec_augment.n_freq_masks);
            maybe(js, "max_freq_width", cfg.spec_augment.max_freq_width);
        }
    }

    if (cfg.mixup.alpha <= 0.0) throw ValidationError("config: mixup alpha must be > 0");
    if (cfg.train.lambda < 0.0) throw ValidationError("config: lambda must be >= 0");
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["expected_sample_rate"] = cfg.expected_sample_rate;
    j["labels"] = cfg.label_set();
    j["paths"] = {{"data_root", cfg.data_root},
                  {"features", cfg.features_dir},
                  {"runs", cfg.runs_dir}};
    j["frontend"] = {{"fft_size", cfg.frontend.fft_size},
                     {"window_size", cfg.frontend.window_size},
                     {"hop_size", cfg.frontend.hop_size},
                     {"n_bins", cfg.frontend.n_bins},
                     {"log_floor", cfg.frontend.log_floor},
                     {"delta_width", cfg.frontend.delta_width},
                     {"cqt_bins_per_octave", cfg.frontend.cqt_bins_per_octave},
                     {"cqt_f_min", cfg.frontend.cqt_f_min},
                     {"patch_frames", cfg.frontend.patch_frames},
                     {"patch_overlap", cfg.frontend.patch_overlap}};
    j["model"] = {{"variant", variant_name(cfg.variant)},
                  {"class_count", cfg.label_set().size()}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"lambda", cfg.train.lambda},
                  {"learning_rate", cfg.train.learning_rate},
                  {"batch_size", cfg.train.batch_size},
                  {"loss", loss_kind_name(cfg.train.loss)},
                  {"seed", cfg.train.seed},
                  {"stop_at_train_acc", cfg.train.stop_at_train_acc}};
    j["augment"] = {
        {"mixup", {{"enabled", cfg.mixup.enabled}, {"alpha", cfg.mixup.alpha}}},
        {"specaugment",
         {{"enabled", cfg.spec_augment.enabled},
          {"n_time_masks", cfg.spec_augment.n_time_masks},
          {"max_time_width", cfg.spec_augment.max_time_width},
          {"n_freq_masks", cfg.spec_augment.n_freq_masks},
          {"max_freq_width", cfg.spec_augment.max_freq_width}}}};
    return j.dump(2);
}

std::string run_config_hash(const RunConfig& cfg) {
    return fnv1a_hex(run_config_to_json(cfg));
}

}  // namespace asc
