#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "asc/tensor.hpp"
#include "asc/wav.hpp"

namespace asc {

enum class FrontendKind { Mel, Gammatone, Cqt };

std::string frontend_kind_name(FrontendKind k);
FrontendKind frontend_kind_from_name(const std::string& name);

/// Shared analysis configuration for the three spectrogram branches.
/// All three front-ends run on the same STFT framing, so feature maps
/// from different branches stay frame-aligned.
struct FrontendConfig {
    FrontendKind kind = FrontendKind::Mel;
    std::size_t fft_size = 8192;
    std::size_t window_size = 4096;
    std::size_t hop_size = 620;
    std::size_t n_bins = 128;
    double log_floor = 1e-10;
    std::size_t delta_width = 9;          // odd, >= 3
    std::size_t cqt_bins_per_octave = 16;
    double cqt_f_min = 0.0;               // 0 = derive from n_bins so the top bin lands at Nyquist
    std::size_t patch_frames = 128;
    double patch_overlap = 0.5;

    void validate(std::uint32_t sample_rate) const;
    double cqt_f_min_for(std::uint32_t sample_rate) const;
};

/// Spectrogram with stacked temporal-derivative channels:
/// values shape [n_bins x n_frames x 3], channel 0 = log energy,
/// channel 1 = delta, channel 2 = delta-delta.
struct Spectrogram {
    Tensor<float> values;
    FrontendKind kind = FrontendKind::Mel;

    std::size_t n_bins() const { return values.dim(0); }
    std::size_t n_frames() const { return values.dim(1); }
};

struct Patch {
    Tensor<float> values;  // [n_bins x patch_frames x 3]
    std::string source_id;
    std::size_t index = 0;
};

/// Windowed power spectrum: Hann window of window_size, zero-padded to
/// fft_size, squared magnitude. Output [fft_size/2+1 x n_frames] with
/// n_frames = floor((len - window_size)/hop_size) + 1.
Tensor<double> stft_power(const AudioClip& clip, const FrontendConfig& cfg);

/// Triangular mel filterbank, [n_bins x fft_size/2+1]. Centers equally
/// spaced on the mel scale between 0 Hz and Nyquist.
Tensor<double> mel_filterbank(const FrontendConfig& cfg, std::uint32_t sample_rate);

/// 4th-order gammatone magnitude-squared responses sampled at FFT bin
/// frequencies, ERB-spaced centers between 40 Hz and Nyquist, each row
/// peak-normalized to 1.
Tensor<double> gammatone_filterbank(const FrontendConfig& cfg, std::uint32_t sample_rate);

/// Log-frequency triangular bank realizing a pseudo-CQT on top of the
/// shared STFT. Bin k center = f_min * 2^(k/B).
Tensor<double> cqt_filterbank(const FrontendConfig& cfg, std::uint32_t sample_rate);

std::vector<double> cqt_center_frequencies(const FrontendConfig& cfg,
                                           std::uint32_t sample_rate);

/// bank [n_bins x K] times power [K x n_frames].
Tensor<double> apply_filterbank(const Tensor<double>& bank, const Tensor<double>& power);

Tensor<double> cqt_spectrogram(const AudioClip& clip, const FrontendConfig& cfg);

/// out = 10*log10(power + log_floor). Rejects negative input.
Tensor<double> log_compress(const Tensor<double>& power, double log_floor);

/// Stacks delta and delta-delta channels computed with a centered
/// regression-slope operator (edge frames replicated).
Spectrogram add_deltas(const Tensor<double>& spec2d, std::size_t delta_width);

/// Per-channel standardization (zero mean, unit variance) in place.
void standardize(Spectrogram& spec);

/// Full front-end pipeline: STFT -> filterbank -> log -> deltas ->
/// standardize.
Spectrogram compute_spectrogram(const AudioClip& clip, const FrontendConfig& cfg);

/// Fixed-width patches with fractional overlap; trailing frames that do
/// not fill a patch are dropped. Patch i starts at frame i*stride with
/// stride = patch_frames*(1-overlap).
std::vector<Patch> split_patches(const Spectrogram& spec, std::size_t patch_frames,
                                 double overlap, const std::string& source_id = "");

namespace detail {
double hz_to_mel(double f);
double mel_to_hz(double m);
double erb_bandwidth(double f);   // 24.7 + f/9.265
double hz_to_erb_rate(double f);  // integral of 1/ERB
double erb_rate_to_hz(double r);
void fft_inplace(std::vector<double>& re, std::vector<double>& im);
}  // namespace detail

}  // namespace asc
