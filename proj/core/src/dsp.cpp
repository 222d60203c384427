#include "asc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "asc/errors.hpp"

namespace asc {

namespace detail {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

double erb_bandwidth(double f) { return 24.7 + f / 9.265; }

// ERB-rate scale: integral of df/ERB(f) = 9.265 * ln(1 + f/(24.7*9.265)).
double hz_to_erb_rate(double f) {
    return 9.265 * std::log(1.0 + f / (24.7 * 9.265));
}
double erb_rate_to_hz(double r) {
    return (24.7 * 9.265) * (std::exp(r / 9.265) - 1.0);
}

// Iterative radix-2 complex FFT, in place. Size must be a power of two.
void fft_inplace(std::vector<double>& re, std::vector<double>& im) {
    const std::size_t n = re.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) {
            std::swap(re[i], re[j]);
            std::swap(im[i], im[j]);
        }
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        double wr = std::cos(ang), wi = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double cr = 1.0, ci = 0.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::size_t a = i + k, b = i + k + len / 2;
                double tr = re[b] * cr - im[b] * ci;
                double ti = re[b] * ci + im[b] * cr;
                re[b] = re[a] - tr;
                im[b] = im[a] - ti;
                re[a] += tr;
                im[a] += ti;
                double ncr = cr * wr - ci * wi;
                ci = cr * wi + ci * wr;
                cr = ncr;
            }
        }
    }
}

}  // namespace detail

std::string frontend_kind_name(FrontendKind k) {
    switch (k) {
        case FrontendKind::Mel: return "mel";
        case FrontendKind::Gammatone: return "gam";
        case FrontendKind::Cqt: return "cqt";
    }
    return "?";
}

FrontendKind frontend_kind_from_name(const std::string& name) {
    if (name == "mel") return FrontendKind::Mel;
    if (name == "gam") return FrontendKind::Gammatone;
    if (name == "cqt") return FrontendKind::Cqt;
    throw ValidationError("unknown frontend kind '" + name + "' (expected mel|gam|cqt)");
}

double FrontendConfig::cqt_f_min_for(std::uint32_t sample_rate) const {
    if (cqt_f_min > 0.0) return cqt_f_min;
    double octaves = static_cast<double>(n_bins) / static_cast<double>(cqt_bins_per_octave);
    return (sample_rate / 2.0) / std::pow(2.0, octaves);
}

void FrontendConfig::validate(std::uint32_t sample_rate) const {
    if (window_size > fft_size)
        throw ValidationError("frontend: window_size must be <= fft_size");
    if ((fft_size & (fft_size - 1)) != 0 || fft_size == 0)
        throw ValidationError("frontend: fft_size must be a power of two");
    if (hop_size < 1) throw ValidationError("frontend: hop_size must be >= 1");
    if (n_bins < 1) throw ValidationError("frontend: n_bins must be >= 1");
    if (delta_width < 3 || delta_width % 2 == 0)
        throw ValidationError("frontend: delta_width must be odd and >= 3");
    if (patch_overlap < 0.0 || patch_overlap >= 1.0)
        throw ValidationError("frontend: patch_overlap must be in [0, 1)");
    if (kind == FrontendKind::Cqt) {
        double fmin = cqt_f_min_for(sample_rate);
        double octaves = static_cast<double>(n_bins) / static_cast<double>(cqt_bins_per_octave);
        if (fmin * std::pow(2.0, octaves) > sample_rate / 2.0 * (1.0 + 1e-9))
            throw ValidationError("frontend: CQT span exceeds Nyquist");
    }
}

Tensor<double> stft_power(const AudioClip& clip, const FrontendConfig& cfg) {
    const std::size_t len = clip.samples.size();
    if (len < cfg.window_size)
        throw ValidationError("stft: clip of " + std::to_string(len) +
                              " samples shorter than one window (" +
                              std::to_string(cfg.window_size) + ")");
    const std::size_t n_frames = (len - cfg.window_size) / cfg.hop_size + 1;
    const std::size_t n_out = cfg.fft_size / 2 + 1;

    std::vector<double> window(cfg.window_size);
    for (std::size_t i = 0; i < cfg.window_size; ++i)
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(cfg.window_size)));

    Tensor<double> out({n_out, n_frames});
    std::vector<double> re(cfg.fft_size), im(cfg.fft_size);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const float* src = clip.samples.data() + t * cfg.hop_size;
        for (std::size_t i = 0; i < cfg.window_size; ++i)
            re[i] = static_cast<double>(src[i]) * window[i];
        std::fill(re.begin() + static_cast<long>(cfg.window_size), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        detail::fft_inplace(re, im);
        for (std::size_t k = 0; k < n_out; ++k)
            out.at(k, t) = re[k] * re[k] + im[k] * im[k];
    }
    return out;
}

namespace {

// Triangular response over bin frequencies; edges (lo, center, hi) on
// an arbitrary monotone axis handled by the caller through `coord`.
void check_rows_nonzero(const Tensor<double>& bank, const char* what) {
    for (std::size_t b = 0; b < bank.dim(0); ++b) {
        bool any = false;
        for (std::size_t k = 0; k < bank.dim(1); ++k)
            if (bank.at(b, k) > 0.0) { any = true; break; }
        if (!any)
            throw ValidationError(std::string(what) + ": filter row " + std::to_string(b) +
                                  " is all-zero; n_bins too large for FFT resolution");
    }
}

}  // namespace

Tensor<double> mel_filterbank(const FrontendConfig& cfg, std::uint32_t sample_rate) {
    const std::size_t n_fft_bins = cfg.fft_size / 2 + 1;
    const double nyquist = sample_rate / 2.0;

    std::vector<double> edges(cfg.n_bins + 2);
    const double mel_lo = detail::hz_to_mel(0.0);
    const double mel_hi = detail::hz_to_mel(nyquist);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = detail::mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                                  static_cast<double>(cfg.n_bins + 1));

    Tensor<double> bank({cfg.n_bins, n_fft_bins});
    for (std::size_t b = 0; b < cfg.n_bins; ++b) {
        double lo = edges[b], c = edges[b + 1], hi = edges[b + 2];
        for (std::size_t k = 0; k < n_fft_bins; ++k) {
            double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_size);
            double w = 0.0;
            if (f > lo && f < hi)
                w = f <= c ? (f - lo) / (c - lo) : (hi - f) / (hi - c);
            bank.at(b, k) = w;
        }
    }
    check_rows_nonzero(bank, "mel_filterbank");
    return bank;
}

Tensor<double> gammatone_filterbank(const FrontendConfig& cfg, std::uint32_t sample_rate) {
    const std::size_t n_fft_bins = cfg.fft_size / 2 + 1;
    const double nyquist = sample_rate / 2.0;
    const double lo = detail::hz_to_erb_rate(40.0);
    const double hi = detail::hz_to_erb_rate(nyquist);

    Tensor<double> bank({cfg.n_bins, n_fft_bins});
    for (std::size_t b = 0; b < cfg.n_bins; ++b) {
        double r = cfg.n_bins == 1
                       ? (lo + hi) / 2.0
                       : lo + (hi - lo) * static_cast<double>(b) /
                                 static_cast<double>(cfg.n_bins - 1);
        double fc = detail::erb_rate_to_hz(r);
        double bw = 1.019 * detail::erb_bandwidth(fc);
        double peak = 0.0;
        for (std::size_t k = 0; k < n_fft_bins; ++k) {
            double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_size);
            double u = (f - fc) / bw;
            // |1 + j u|^-8 = (1 + u^2)^-4, squared magnitude of a
            // 4th-order gammatone.
            double w = std::pow(1.0 + u * u, -4.0);
            bank.at(b, k) = w;
            peak = std::max(peak, w);
        }
        for (std::size_t k = 0; k < n_fft_bins; ++k) bank.at(b, k) /= peak;
    }
    check_rows_nonzero(bank, "gammatone_filterbank");
    return bank;
}

std::vector<double> cqt_center_frequencies(const FrontendConfig& cfg,
                                           std::uint32_t sample_rate) {
    double fmin = cfg.cqt_f_min_for(sample_rate);
    std::vector<double> centers(cfg.n_bins);
    for (std::size_t b = 0; b < cfg.n_bins; ++b)
        centers[b] = fmin * std::pow(2.0, static_cast<double>(b) /
                                              static_cast<double>(cfg.cqt_bins_per_octave));
    return centers;
}

Tensor<double> cqt_filterbank(const FrontendConfig& cfg, std::uint32_t sample_rate) {
    const std::size_t n_fft_bins = cfg.fft_size / 2 + 1;
    std::vector<double> centers = cqt_center_frequencies(cfg, sample_rate);
    const double ratio = std::pow(2.0, 1.0 / static_cast<double>(cfg.cqt_bins_per_octave));

    Tensor<double> bank({cfg.n_bins, n_fft_bins});
    for (std::size_t b = 0; b < cfg.n_bins; ++b) {
        // Triangle on the log-frequency axis between the neighboring
        // centers; bandwidth proportional to the center frequency.
        double c = centers[b];
        double lo = c / ratio, hi = c * ratio;
        double log_lo = std::log2(lo), log_c = std::log2(c), log_hi = std::log2(hi);
        for (std::size_t k = 1; k < n_fft_bins; ++k) {
            double f = static_cast<double>(k) * sample_rate / static_cast<double>(cfg.fft_size);
            double lf = std::log2(f);
            double w = 0.0;
            if (lf > log_lo && lf < log_hi)
                w = lf <= log_c ? (lf - log_lo) / (log_c - log_lo)
                                : (log_hi - lf) / (log_hi - log_c);
            bank.at(b, k) = w;
        }
    }
    check_rows_nonzero(bank, "cqt_filterbank");
    return bank;
}

Tensor<double> apply_filterbank(const Tensor<double>& bank, const Tensor<double>& power) {
    if (bank.dim(1) != power.dim(0))
        throw ShapeError("apply_filterbank: bank " + bank.shape_str() + " vs power " +
                         power.shape_str());
    const std::size_t n_bins = bank.dim(0), n_fft = bank.dim(1), n_frames = power.dim(1);
    Tensor<double> out({n_bins, n_frames});
    for (std::size_t b = 0; b < n_bins; ++b) {
        for (std::size_t k = 0; k < n_fft; ++k) {
            double w = bank.at(b, k);
            if (w == 0.0) continue;
            const double* row = power.data() + k * n_frames;
            double* dst = out.data() + b * n_frames;
            for (std::size_t t = 0; t < n_frames; ++t) dst[t] += w * row[t];
        }
    }
    return out;
}

Tensor<double> cqt_spectrogram(const AudioClip& clip, const FrontendConfig& cfg) {
    Tensor<double> power = stft_power(clip, cfg);
    Tensor<double> bank = cqt_filterbank(cfg, clip.sample_rate);
    return apply_filterbank(bank, power);
}

Tensor<double> log_compress(const Tensor<double>& power, double log_floor) {
    Tensor<double> out(power.shape);
    for (std::size_t i = 0; i < power.values.size(); ++i) {
        double v = power.values[i];
        if (v < 0.0)
            throw ValidationError("log_compress: negative power entry " + std::to_string(v));
        out.values[i] = 10.0 * std::log10(v + log_floor);
    }
    return out;
}

namespace {

// Centered regression-slope delta with edge replication.
Tensor<double> delta_of(const Tensor<double>& x, std::size_t width) {
    const std::size_t bins = x.dim(0), frames = x.dim(1);
    const long half = static_cast<long>(width / 2);
    double denom = 0.0;
    for (long i = 1; i <= half; ++i) denom += 2.0 * static_cast<double>(i * i);

    Tensor<double> out({bins, frames});
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t t = 0; t < frames; ++t) {
            double acc = 0.0;
            for (long i = 1; i <= half; ++i) {
                long tp = std::clamp(static_cast<long>(t) + i, 0L,
                                     static_cast<long>(frames) - 1);
                long tm = std::clamp(static_cast<long>(t) - i, 0L,
                                     static_cast<long>(frames) - 1);
                acc += static_cast<double>(i) *
                       (x.at(b, static_cast<std::size_t>(tp)) -
                        x.at(b, static_cast<std::size_t>(tm)));
            }
            out.at(b, t) = acc / denom;
        }
    }
    return out;
}

}  // namespace

Spectrogram add_deltas(const Tensor<double>& spec2d, std::size_t delta_width) {
    const std::size_t bins = spec2d.dim(0), frames = spec2d.dim(1);
    if (frames < delta_width)
        throw ValidationError("add_deltas: " + std::to_string(frames) +
                              " frames < delta_width " + std::to_string(delta_width));
    Tensor<double> d1 = delta_of(spec2d, delta_width);
    Tensor<double> d2 = delta_of(d1, delta_width);

    Spectrogram spec;
    spec.values = Tensor<float>({bins, frames, 3});
    for (std::size_t b = 0; b < bins; ++b)
        for (std::size_t t = 0; t < frames; ++t) {
            spec.values.at(b, t, 0) = static_cast<float>(spec2d.at(b, t));
            spec.values.at(b, t, 1) = static_cast<float>(d1.at(b, t));
            spec.values.at(b, t, 2) = static_cast<float>(d2.at(b, t));
        }
    return spec;
}

void standardize(Spectrogram& spec) {
    const std::size_t bins = spec.n_bins(), frames = spec.n_frames();
    const double n = static_cast<double>(bins * frames);
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t b = 0; b < bins; ++b)
            for (std::size_t t = 0; t < frames; ++t) {
                double v = spec.values.at(b, t, c);
                sum += v;
                sq += v * v;
            }
        double mean = sum / n;
        double var = std::max(sq / n - mean * mean, 0.0);
        double inv = var < 1e-16 ? 1.0 : 1.0 / std::sqrt(var);
        for (std::size_t b = 0; b < bins; ++b)
            for (std::size_t t = 0; t < frames; ++t)
                spec.values.at(b, t, c) =
                    static_cast<float>((spec.values.at(b, t, c) - mean) * inv);
    }
}

Spectrogram compute_spectrogram(const AudioClip& clip, const FrontendConfig& cfg) {
    cfg.validate(clip.sample_rate);
    Tensor<double> banked;
    if (cfg.kind == FrontendKind::Cqt) {
        banked = cqt_spectrogram(clip, cfg);
    } else {
        Tensor<double> power = stft_power(clip, cfg);
        Tensor<double> bank = cfg.kind == FrontendKind::Mel
                                  ? mel_filterbank(cfg, clip.sample_rate)
                                  : gammatone_filterbank(cfg, clip.sample_rate);
        banked = apply_filterbank(bank, power);
    }
    Spectrogram spec = add_deltas(log_compress(banked, cfg.log_floor), cfg.delta_width);
    spec.kind = cfg.kind;
    standardize(spec);
    return spec;
}

std::vector<Patch> split_patches(const Spectrogram& spec, std::size_t patch_frames,
                                 double overlap, const std::string& source_id) {
    if (overlap < 0.0 || overlap >= 1.0)
        throw ValidationError("split_patches: overlap must be in [0, 1)");
    if (spec.n_frames() < patch_frames)
        throw ValidationError("split_patches: spectrogram of " +
                              std::to_string(spec.n_frames()) +
                              " frames narrower than one patch (" +
                              std::to_string(patch_frames) + ")");
    auto stride = static_cast<std::size_t>(
        std::lround(static_cast<double>(patch_frames) * (1.0 - overlap)));
    stride = std::max<std::size_t>(stride, 1);
    const std::size_t count = (spec.n_frames() - patch_frames) / stride + 1;

    std::vector<Patch> patches;
    patches.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Patch p;
        p.source_id = source_id;
        p.index = i;
        p.values = Tensor<float>({spec.n_bins(), patch_frames, 3});
        const std::size_t t0 = i * stride;
        for (std::size_t b = 0; b < spec.n_bins(); ++b)
            for (std::size_t t = 0; t < patch_frames; ++t)
                for (std::size_t c = 0; c < 3; ++c)
                    p.values.at(b, t, c) = spec.values.at(b, t0 + t, c);
        patches.push_back(std::move(p));
    }
    return patches;
}

}  // namespace asc
