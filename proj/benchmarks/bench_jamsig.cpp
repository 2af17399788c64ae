// Microbenchmarks for the hot paths: capture synthesis, the FFT/PSD front
// end, dense and convolutional layer passes, and whole training steps.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "jamsig/cgan.hpp"
#include "jamsig/cnn.hpp"
#include "jamsig/dsp.hpp"
#include "jamsig/synth.hpp"

using namespace jamsig;

namespace {

Tensor random_tensor(const std::vector<int>& shape, std::uint64_t seed) {
    Tensor t(shape);
    Rng rng(seed);
    init_gaussian(t, rng, 0.5);
    return t;
}

std::vector<int> cycled_labels(int count) {
    std::vector<int> labels(count);
    for (int k = 0; k < count; ++k) labels[k] = k % kNumClasses;
    return labels;
}

void BM_SynthesizeLabeled(benchmark::State& state) {
    SynthConfig cfg;
    cfg.global_seed = 1;
    const auto cls = class_from_id(static_cast<int>(state.range(0)));
    std::int64_t index = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(synthesize_labeled(cls, 10.0, index++, cfg));
    }
}
BENCHMARK(BM_SynthesizeLabeled)->Arg(0)->Arg(4)->Arg(6)->Arg(7);

void BM_FftRawCapture(benchmark::State& state) {
    std::vector<std::complex<double>> x(kRawCaptureLength);
    Rng rng(2);
    for (auto& v : x) v = std::complex<double>(rng.next_gaussian(), rng.next_gaussian());
    for (auto _ : state) benchmark::DoNotOptimize(fft(x));
}
BENCHMARK(BM_FftRawCapture);

void BM_Psd(benchmark::State& state) {
    SynthConfig cfg;
    cfg.global_seed = 3;
    const IQCapture capture = synthesize_labeled(JammingClass::Nbnj, 10.0, 0, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(psd(capture));
}
BENCHMARK(BM_Psd);

void BM_DenseForwardBackward(benchmark::State& state) {
    Dense layer(512, 512);
    const Tensor x = random_tensor({128, 512}, 4);
    const Tensor g = random_tensor({128, 512}, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(layer.forward(x, true));
        benchmark::DoNotOptimize(layer.backward(g));
    }
}
BENCHMARK(BM_DenseForwardBackward);

void BM_Conv1dForwardBackward(benchmark::State& state) {
    Conv1d layer(1, 16, 7, 2, 3);
    const Tensor x = random_tensor({32, 1, kSpectrumLength}, 6);
    const Tensor g = random_tensor({32, 16, kSpectrumLength / 2}, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(layer.forward(x, true));
        benchmark::DoNotOptimize(layer.backward(g));
    }
}
BENCHMARK(BM_Conv1dForwardBackward);

void BM_GeneratorForward(benchmark::State& state) {
    GeneratorNet gen(8);
    const int batch = static_cast<int>(state.range(0));
    const Tensor z = random_tensor({batch, kNoiseDim}, 9);
    const auto labels = cycled_labels(batch);
    for (auto _ : state) benchmark::DoNotOptimize(gen.forward(z, labels, false));
}
BENCHMARK(BM_GeneratorForward)->Arg(32)->Arg(128);

void BM_GanEpoch(benchmark::State& state) {
    GanTrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 10;
    GanTrainer trainer(cfg);
    const int rows = static_cast<int>(state.range(0));
    const Tensor x = random_tensor({rows, kSpectrumLength}, 11);
    const auto labels = cycled_labels(rows);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.train(x, labels));
}
BENCHMARK(BM_GanEpoch)->Arg(24)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_CnnEpoch(benchmark::State& state) {
    CnnTrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 12;
    CnnTrainer trainer(cfg);
    const int rows = static_cast<int>(state.range(0));
    const Tensor x = random_tensor({rows, kSpectrumLength}, 13);
    const auto labels = cycled_labels(rows);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.train(x, labels));
}
BENCHMARK(BM_CnnEpoch)->Arg(120)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_CnnPredict(benchmark::State& state) {
    CnnTrainConfig cfg;
    cfg.seed = 14;
    CnnTrainer trainer(cfg);
    const Tensor x = random_tensor({256, kSpectrumLength}, 15);
    for (auto _ : state) benchmark::DoNotOptimize(trainer.predict(x));
}
BENCHMARK(BM_CnnPredict)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
