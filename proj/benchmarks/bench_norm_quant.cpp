#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vowelprompt/norm_quant.hpp"

namespace {

std::vector<vowelprompt::VowelLLD> corpus(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const char* vowels[] = {"a", "i", "u", "\xC9\x9B", "\xC9\x94", "\xC3\xA6"};
  std::vector<vowelprompt::VowelLLD> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = out[i];
    v.segment.utterance_id = "u" + std::to_string(i / 8);
    v.segment.speaker_id = "spk" + std::to_string(i % 40);
    v.segment.ipa = vowels[i % 6];
    v.segment.start = 0.0;
    v.segment.end = v.duration = 0.03 + 0.2 * u(rng);
    v.pitch_available = u(rng) > 0.1;
    v.voiced_frames = v.pitch_available ? 5 : 0;
    v.f0_mean = 100.0 + 150.0 * u(rng);
    v.f0_slope = 400.0 * (u(rng) - 0.5);
    v.f0_std = 30.0 * u(rng);
    v.intensity_mean = -40.0 + 30.0 * u(rng);
    v.intensity_std = 5.0 * u(rng);
  }
  return out;
}

void BM_Fit(benchmark::State& state) {
  const auto data = corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vowelprompt::fit(data, 5, 10));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fit)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_BinSegment(benchmark::State& state) {
  const auto data = corpus(10000);
  const auto model = vowelprompt::fit(data, 5, 10);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(vowelprompt::bin_segment(data[i], model));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_BinSegment);

}  // namespace
