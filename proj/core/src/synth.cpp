#include "asc/synth.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "asc/errors.hpp"
#include "asc/wav.hpp"

namespace asc {

SyntheticPatchSet make_synthetic_patches(std::size_t n_patches, std::size_t bins,
                                         std::size_t frames, std::size_t class_count,
                                         std::uint32_t seed) {
    if (class_count < 2) throw ValidationError("make_synthetic_patches: need >= 2 classes");
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_real_distribution<double> amp(1.5, 2.5);

    SyntheticPatchSet set;
    set.class_count = class_count;
    const std::size_t band = bins / class_count;
    for (std::size_t i = 0; i < n_patches; ++i) {
        int label = static_cast<int>(i % class_count);
        Tensor<float> p({bins, frames, 3});
        const std::size_t lo = static_cast<std::size_t>(label) * band;
        const std::size_t hi = lo + band;
        const double a = amp(rng);
        for (std::size_t b = 0; b < bins; ++b)
            for (std::size_t t = 0; t < frames; ++t) {
                double energy = (b >= lo && b < hi) ? a : 0.0;
                p.at(b, t, 0) = static_cast<float>(energy + noise(rng));
                p.at(b, t, 1) = static_cast<float>(noise(rng) * 0.1);
                p.at(b, t, 2) = static_cast<float>(noise(rng) * 0.1);
            }
        set.patches.push_back(std::move(p));
        set.labels.push_back(label);
    }
    return set;
}

SynthCorpus write_synthetic_corpus(const std::string& out_dir, const SynthCorpusConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "audio");

    const std::vector<std::string> labels = {"low_band", "mid_band", "high_band"};
    // Class tone bands in Hz, well separated across the spectrum.
    const double bands[3][2] = {{150.0, 400.0}, {900.0, 2200.0}, {4000.0, 9000.0}};

    std::mt19937 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 0.02);

    std::ofstream manifest(fs::path(out_dir) / "manifest.tsv");
    if (!manifest) throw IoError("cannot write manifest in " + out_dir);
    manifest << "filename\tscene_label\tdevice\tcity\tsplit\n";

    const std::size_t n_samples = static_cast<std::size_t>(cfg.seconds * cfg.sample_rate);
    const char* devices[] = {"A", "B", "S1"};
    std::size_t clip_no = 0;
    for (std::size_t cls = 0; cls < labels.size(); ++cls) {
        std::uniform_real_distribution<double> freq(bands[cls][0], bands[cls][1]);
        const std::size_t total = cfg.clips_per_class_train + cfg.clips_per_class_eval;
        for (std::size_t k = 0; k < total; ++k) {
            double f1 = freq(rng), f2 = freq(rng), f3 = freq(rng);
            std::vector<float> samples(n_samples);
            for (std::size_t i = 0; i < n_samples; ++i) {
                double t = static_cast<double>(i) / cfg.sample_rate;
                double v = 0.2 * std::sin(2.0 * std::numbers::pi * f1 * t) +
                           0.15 * std::sin(2.0 * std::numbers::pi * f2 * t) +
                           0.1 * std::sin(2.0 * std::numbers::pi * f3 * t) + noise(rng);
                samples[i] = static_cast<float>(v);
            }
            std::string fname = "audio/" + labels[cls] + "_" + std::to_string(k) + ".wav";
            write_wav_pcm16((fs::path(out_dir) / fname).string(), samples, cfg.sample_rate);
            bool is_eval = k >= cfg.clips_per_class_train;
            manifest << fname << '\t' << labels[cls] << '\t' << devices[clip_no % 3]
                     << "\tsynthville\t" << (is_eval ? "eval" : "train") << "\n";
            ++clip_no;
        }
    }
    manifest.close();

    std::ofstream labf(fs::path(out_dir) / "labels.txt");
    for (const auto& l : labels) labf << l << "\n";

    SynthCorpus corpus;
    corpus.manifest_path = (fs::path(out_dir) / "manifest.tsv").string();
    corpus.labels = labels;
    return corpus;
}

}  // namespace asc
