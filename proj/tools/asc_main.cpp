// Command-line front door for the acoustic-scene-classification toolkit:
// feature extraction, per-branch training, evaluation with optional PROD
// fusion, and model-complexity auditing.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "asc/checkpoint.hpp"
#include "asc/cnn7.hpp"
#include "asc/complexity.hpp"
#include "asc/errors.hpp"
#include "asc/eval.hpp"
#include "asc/feature_cache.hpp"
#include "asc/manifest.hpp"
#include "asc/run_config.hpp"
#include "asc/synth.hpp"
#include "asc/train.hpp"
#include "asc/wav.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace asc;

namespace {

std::string feature_path(const std::string& features_dir, FrontendKind kind,
                         const std::string& audio_rel_path) {
    fs::path p = fs::path(features_dir) / frontend_kind_name(kind) /
                 (fs::path(audio_rel_path).stem().string() + ".feat");
    return p.string();
}

AudioClip read_checked(const RunConfig& cfg, const std::string& rel_path) {
    AudioClip clip = read_wav((fs::path(cfg.data_root) / rel_path).string());
    if (clip.sample_rate != cfg.expected_sample_rate)
        throw ValidationError(rel_path + ": sample rate " + std::to_string(clip.sample_rate) +
                              " does not match expected_sample_rate " +
                              std::to_string(cfg.expected_sample_rate) +
                              " (resampling is not performed)");
    return clip;
}

Spectrogram features_for(const RunConfig& cfg, const FrontendConfig& fe,
                         const std::string& features_dir, const ManifestEntry& entry) {
    std::string fpath = feature_path(features_dir, fe.kind, entry.path);
    if (feature_cache_hit(fpath, fe)) return load_feature_cache(fpath);
    return compute_spectrogram(read_checked(cfg, entry.path), fe);
}

int cmd_extract(const RunConfig& cfg, const std::string& manifest_path,
                FrontendKind kind, const std::string& out_dir, unsigned jobs) {
    FrontendConfig fe = cfg.frontend;
    fe.kind = kind;
    auto entries = load_manifest(manifest_path, cfg.label_set());
    fs::create_directories(fs::path(out_dir) / frontend_kind_name(kind));

    std::atomic<std::size_t> next{0}, computed{0}, skipped{0}, failed{0};
    std::mutex log_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= entries.size()) return;
            const auto& e = entries[i];
            std::string fpath = feature_path(out_dir, kind, e.path);
            try {
                if (feature_cache_hit(fpath, fe)) {
                    ++skipped;
                    continue;
                }
                Spectrogram spec = compute_spectrogram(read_checked(cfg, e.path), fe);
                save_feature_cache(fpath, spec, fe);
                ++computed;
            } catch (const std::exception& ex) {
                ++failed;
                std::lock_guard lock(log_mutex);
                std::cerr << "extract: " << e.path << ": " << ex.what() << "\n";
            }
        }
    };
    jobs = std::max(1u, jobs);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::cerr << "extract: " << computed << " computed, " << skipped << " cached, " << failed
              << " failed\n";
    return failed == 0 ? 0 : 2;
}

int cmd_train(const RunConfig& cfg, const std::string& manifest_path,
              const std::string& features_dir, FrontendKind kind,
              const std::string& runs_dir) {
    FrontendConfig fe = cfg.frontend;
    fe.kind = kind;
    auto entries = load_manifest(manifest_path, cfg.label_set());

    std::vector<Tensor<float>> patches;
    std::vector<int> labels;
    for (const auto& e : entries) {
        if (e.split != Split::Train) continue;
        std::string fpath = feature_path(features_dir, kind, e.path);
        if (!feature_cache_hit(fpath, fe))
            throw ValidationError("missing features for " + e.path + "; run: asc extract --frontend " +
                                  frontend_kind_name(kind));
        Spectrogram spec = load_feature_cache(fpath);
        for (auto& p : split_patches(spec, fe.patch_frames, fe.patch_overlap, e.path)) {
            patches.push_back(std::move(p.values));
            labels.push_back(label_index(cfg.label_set(), e.scene_label));
        }
    }
    if (patches.empty()) throw ValidationError("train: no training patches found");
    std::cerr << "train[" << frontend_kind_name(kind) << "]: " << patches.size()
              << " patches, " << cfg.train.epochs << " epochs\n";

    std::mt19937 init_rng(cfg.train.seed);
    ModelSpec spec = build_cnn7(cfg.variant, cfg.label_set().size(),
                                {cfg.frontend.n_bins, cfg.frontend.patch_frames, 3});
    Model<float> model(spec, init_rng);
    TrainResult result =
        train_model(model, patches, labels, cfg.label_set().size(), cfg.train, cfg.mixup,
                    cfg.spec_augment);

    std::string hash = run_config_hash(cfg);
    fs::path run_dir = fs::path(runs_dir) / frontend_kind_name(kind) / hash;
    fs::create_directories(run_dir);
    save_checkpoint((run_dir / "checkpoint.bin").string(),
                    checkpoint_from_model(model, hash));
    write_loss_curve_csv((run_dir / "loss.csv").string(), result);
    std::ofstream((run_dir / "config.json").string()) << run_config_to_json(cfg);
    auto now = std::chrono::system_clock::now().time_since_epoch();
    std::ofstream((run_dir / "meta.json").string())
        << nlohmann::json{{"finished_unix_ms",
                           std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}}
               .dump(2);
    std::cerr << "train[" << frontend_kind_name(kind)
              << "]: final loss " << result.epoch_loss.back() << ", train acc "
              << result.epoch_acc.back() << " %, run dir " << run_dir << "\n";
    std::cout << run_dir.string() << "\n";
    return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& manifest_path,
             const std::string& features_dir,
             const std::vector<std::pair<FrontendKind, std::string>>& checkpoints, bool fuse,
             const std::string& out_dir) {
    if (checkpoints.empty()) throw ValidationError("eval: need at least one --checkpoint");
    if (fuse && checkpoints.size() < 2)
        throw ValidationError("eval: --fuse requires checkpoints for >= 2 branches");

    std::mt19937 rng(cfg.seed);
    std::vector<std::unique_ptr<Model<float>>> models;
    for (const auto& [kind, path] : checkpoints) {
        Checkpoint ckpt = load_checkpoint(path);
        auto model = std::make_unique<Model<float>>(ckpt.spec, rng);
        load_into_model(ckpt, *model);
        models.push_back(std::move(model));
    }

    auto entries = load_manifest(manifest_path, cfg.label_set());
    std::vector<RecordingPrediction> preds;
    for (const auto& e : entries) {
        if (e.split != Split::Eval) continue;
        RecordingPrediction rp;
        rp.id = e.path;
        rp.device_id = e.device_id;
        rp.true_label = label_index(cfg.label_set(), e.scene_label);
        for (std::size_t s = 0; s < checkpoints.size(); ++s) {
            FrontendConfig fe = cfg.frontend;
            fe.kind = checkpoints[s].first;
            Spectrogram spec = features_for(cfg, fe, features_dir, e);
            PredictionSet ps = patch_probabilities(*models[s], spec, fe, e.path);
            rp.branch_probs.push_back(average_patches(ps));
        }
        preds.push_back(std::move(rp));
    }
    if (preds.empty()) throw ValidationError("eval: manifest has no eval-split recordings");

    fs::create_directories(out_dir);
    auto emit = [&](const EvalReport& report, const std::string& stem) {
        std::ofstream((fs::path(out_dir) / (stem + ".json")).string())
            << eval_report_to_json(report, cfg.label_set());
        std::ofstream((fs::path(out_dir) / (stem + ".txt")).string())
            << eval_report_to_text(report, cfg.label_set());
        std::cerr << "eval: " << stem << " overall accuracy " << report.overall_accuracy_pct
                  << " %\n";
    };

    if (fuse) {
        emit(build_eval_report(preds, cfg.label_set(), true), "report_fused");
    } else {
        for (std::size_t s = 0; s < checkpoints.size(); ++s)
            emit(build_eval_report(preds, cfg.label_set(), false, s),
                 "report_" + frontend_kind_name(checkpoints[s].first));
    }
    auto now = std::chrono::system_clock::now().time_since_epoch();
    std::ofstream((fs::path(out_dir) / "meta.json").string())
        << nlohmann::json{{"finished_unix_ms",
                           std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}}
               .dump(2);
    return 0;
}

int cmd_audit(const std::string& variant, const std::string& checkpoint_path,
              std::size_t class_count, unsigned ensemble, double assert_max_kb,
              const std::string& json_out) {
    ModelSpec spec;
    if (!checkpoint_path.empty()) {
        spec = load_checkpoint(checkpoint_path).spec;
    } else {
        spec = build_cnn7(variant_from_name(variant), class_count);
    }
    ComplexityReport report = count_params(spec);
    std::cout << complexity_report_to_text(report);
    if (ensemble > 1) {
        std::vector<ComplexityReport> reports(ensemble, report);
        std::cout << "ensemble of " << ensemble << " (incl. BN): "
                  << ComplexityReport::kb(ensemble_params(reports, true)) << " KB\n";
        std::cout << "ensemble of " << ensemble << " (excl. BN): "
                  << ComplexityReport::kb(ensemble_params(reports, false)) << " KB\n";
    }
    if (!json_out.empty()) std::ofstream(json_out) << complexity_report_to_json(report);

    if (assert_max_kb > 0.0) {
        // The budget check passes if either counting convention fits.
        double kb_with = ComplexityReport::kb(
            ensemble_params(std::vector<ComplexityReport>(std::max(1u, ensemble), report), true));
        double kb_without = ComplexityReport::kb(
            ensemble_params(std::vector<ComplexityReport>(std::max(1u, ensemble), report), false));
        if (std::min(kb_with, kb_without) > assert_max_kb) {
            std::cerr << "audit: size " << kb_without << " KB (excl. BN) exceeds budget of "
                      << assert_max_kb << " KB\n";
            return 1;
        }
    }
    return 0;
}

int cmd_synth_dataset(const std::string& out_dir, const SynthCorpusConfig& cfg) {
    SynthCorpus corpus = write_synthetic_corpus(out_dir, cfg);

    // Ship a ready-to-run config next to the corpus so the smoke
    // pipeline needs no hand-written JSON.
    RunConfig rc;
    rc.labels = corpus.labels;
    rc.data_root = out_dir;
    rc.features_dir = (fs::path(out_dir) / "features").string();
    rc.runs_dir = (fs::path(out_dir) / "runs").string();
    rc.expected_sample_rate = cfg.sample_rate;
    rc.train.epochs = 5;
    std::ofstream((fs::path(out_dir) / "config.json").string()) << run_config_to_json(rc);

    std::cerr << "synth-dataset: wrote corpus under " << out_dir << "\n";
    std::cout << corpus.manifest_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-complexity acoustic scene classification toolkit"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, features_dir = "features", out_dir;
    std::string frontend_name = "mel", variant = "crdc", checkpoint_path, json_out;
    unsigned jobs = 1, ensemble = 1;
    double assert_max_kb = 0.0;
    std::size_t class_count = 10;
    bool fuse = false;
    std::vector<std::string> checkpoint_args;
    SynthCorpusConfig synth_cfg;

    auto* extract = app.add_subcommand("extract", "Compute and cache spectrogram features");
    extract->add_option("--config", config_path)->required();
    extract->add_option("--manifest", manifest_path)->required();
    extract->add_option("--frontend", frontend_name, "mel|gam|cqt")->required();
    extract->add_option("--out", features_dir, "feature cache directory");
    extract->add_option("--jobs", jobs, "parallel extraction workers");

    auto* train = app.add_subcommand("train", "Train one spectrogram branch");
    train->add_option("--config", config_path)->required();
    train->add_option("--manifest", manifest_path)->required();
    train->add_option("--features", features_dir)->required();
    train->add_option("--branch", frontend_name, "mel|gam|cqt")->required();
    std::string runs_dir;
    train->add_option("--runs", runs_dir, "runs directory (default from config)");

    auto* eval = app.add_subcommand("eval", "Evaluate checkpoints, optionally PROD-fused");
    eval->add_option("--config", config_path)->required();
    eval->add_option("--manifest", manifest_path)->required();
    eval->add_option("--features", features_dir);
    eval->add_option("--checkpoint", checkpoint_args,
                     "branch=path, e.g. mel=runs/mel/abc/checkpoint.bin")
        ->required();
    eval->add_flag("--fuse", fuse, "PROD fusion across branches");
    eval->add_option("--out", out_dir, "report output directory")->required();

    auto* audit = app.add_subcommand("audit", "Parameter-count and size report");
    audit->add_option("--variant", variant, "baseline|cr|crdc");
    audit->add_option("--checkpoint", checkpoint_path, "audit a trained checkpoint instead");
    audit->add_option("--classes", class_count);
    audit->add_option("--ensemble", ensemble, "multiply totals for an N-branch ensemble");
    audit->add_option("--assert-max-kb", assert_max_kb,
                      "exit nonzero if the total exceeds this budget");
    audit->add_option("--json", json_out, "write the report as JSON to this path");

    auto* synth = app.add_subcommand("synth-dataset", "Emit the toy synthetic corpus");
    synth->add_option("--out", out_dir)->required();
    synth->add_option("--clips-per-class", synth_cfg.clips_per_class_train);
    synth->add_option("--eval-per-class", synth_cfg.clips_per_class_eval);
    synth->add_option("--seconds", synth_cfg.seconds);
    synth->add_option("--sample-rate", synth_cfg.sample_rate);
    synth->add_option("--seed", synth_cfg.seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            RunConfig cfg = load_run_config(config_path);
            return cmd_extract(cfg, manifest_path, frontend_kind_from_name(frontend_name),
                               features_dir, jobs);
        }
        if (train->parsed()) {
            RunConfig cfg = load_run_config(config_path);
            if (runs_dir.empty()) runs_dir = cfg.runs_dir;
            return cmd_train(cfg, manifest_path, features_dir,
                             frontend_kind_from_name(frontend_name), runs_dir);
        }
        if (eval->parsed()) {
            RunConfig cfg = load_run_config(config_path);
            std::vector<std::pair<FrontendKind, std::string>> checkpoints;
            for (const auto& arg : checkpoint_args) {
                auto pos = arg.find('=');
                if (pos == std::string::npos)
                    throw ValidationError("--checkpoint expects branch=path, got '" + arg + "'");
                checkpoints.emplace_back(frontend_kind_from_name(arg.substr(0, pos)),
                                         arg.substr(pos + 1));
            }
            return cmd_eval(cfg, manifest_path, features_dir, checkpoints, fuse, out_dir);
        }
        if (audit->parsed())
            return cmd_audit(variant, checkpoint_path, class_count, ensemble, assert_max_kb,
                             json_out);
        if (synth->parsed()) return cmd_synth_dataset(out_dir, synth_cfg);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
