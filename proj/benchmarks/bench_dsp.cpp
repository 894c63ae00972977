#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "vowelprompt/dsp.hpp"

namespace {

vowelprompt::AudioBuffer voiced_audio(double seconds, int sr) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.01);
  vowelprompt::AudioBuffer a;
  a.sample_rate = sr;
  const auto n = static_cast<std::size_t>(seconds * sr);
  a.samples.resize(n);
  double phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hz = 150.0 + 40.0 * std::sin(2.0 * M_PI * 0.7 * static_cast<double>(i) / sr);
    phase += 2.0 * M_PI * hz / sr;
    a.samples[i] = 0.4 * std::sin(phase) + 0.2 * std::sin(2.0 * phase) + noise(rng);
  }
  return a;
}

void BM_F0Contour(benchmark::State& state) {
  const auto audio = voiced_audio(static_cast<double>(state.range(0)), 16000);
  const vowelprompt::PitchBounds bounds{75.0, 400.0};
  for (auto _ : state) benchmark::DoNotOptimize(vowelprompt::f0_contour(audio, bounds));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(audio.samples.size()));
}
BENCHMARK(BM_F0Contour)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_IntensityContour(benchmark::State& state) {
  const auto audio = voiced_audio(static_cast<double>(state.range(0)), 16000);
  for (auto _ : state) benchmark::DoNotOptimize(vowelprompt::intensity_contour(audio));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(audio.samples.size()));
}
BENCHMARK(BM_IntensityContour)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace
