// Microbenchmarks for the hot paths: STFT, filterbank application, and
// the two convolution flavors. Run: ./asc_bench [--benchmark_filter=...]

#include <random>

#include <benchmark/benchmark.h>

#include "asc/dsp.hpp"
#include "asc/layers.hpp"

using namespace asc;

namespace {

AudioClip random_clip(std::size_t samples, std::uint32_t rate) {
    AudioClip c;
    c.sample_rate = rate;
    c.samples.resize(samples);
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> d(-0.5f, 0.5f);
    for (auto& s : c.samples) s = d(rng);
    return c;
}

void BM_StftPower(benchmark::State& state) {
    FrontendConfig cfg;
    AudioClip clip = random_clip(441000, 44100);  // 10 s at the default rate
    for (auto _ : state) {
        Tensor<double> p = stft_power(clip, cfg);
        benchmark::DoNotOptimize(p.values.data());
    }
}
BENCHMARK(BM_StftPower)->Unit(benchmark::kMillisecond);

void BM_MelSpectrogram(benchmark::State& state) {
    FrontendConfig cfg;
    AudioClip clip = random_clip(441000, 44100);
    for (auto _ : state) {
        Spectrogram s = compute_spectrogram(clip, cfg);
        benchmark::DoNotOptimize(s.values.values.data());
    }
}
BENCHMARK(BM_MelSpectrogram)->Unit(benchmark::kMillisecond);

void BM_FilterbankApply(benchmark::State& state) {
    FrontendConfig cfg;
    Tensor<double> bank = mel_filterbank(cfg, 44100);
    Tensor<double> power({cfg.fft_size / 2 + 1, 705});
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (auto& v : power.values) v = d(rng);
    for (auto _ : state) {
        Tensor<double> out = apply_filterbank(bank, power);
        benchmark::DoNotOptimize(out.values.data());
    }
}
BENCHMARK(BM_FilterbankApply)->Unit(benchmark::kMillisecond);

Tensor<float> random_activation(std::size_t side, std::size_t ch) {
    Tensor<float> x({1, side, side, ch});
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> d(-1.0f, 1.0f);
    for (auto& v : x.values) v = d(rng);
    return x;
}

void BM_ConvForward(benchmark::State& state) {
    std::mt19937 rng(4);
    const std::size_t c = std::size_t(state.range(0));
    Conv2d<float> conv("conv", 3, c, c, rng);
    Tensor<float> x = random_activation(64, c);
    for (auto _ : state) {
        Tensor<float> y = conv.forward(x, Mode::Infer, rng);
        benchmark::DoNotOptimize(y.values.data());
    }
}
BENCHMARK(BM_ConvForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_DecomposedConvForward(benchmark::State& state) {
    std::mt19937 rng(5);
    const std::size_t c = std::size_t(state.range(0));
    DecomposedConv2d<float> conv("dconv", c, c, rng);
    Tensor<float> x = random_activation(64, c);
    for (auto _ : state) {
        Tensor<float> y = conv.forward(x, Mode::Infer, rng);
        benchmark::DoNotOptimize(y.values.data());
    }
}
BENCHMARK(BM_DecomposedConvForward)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
