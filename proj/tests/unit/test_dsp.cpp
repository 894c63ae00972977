#include <doctest.h>

#include <cmath>

#include "synth.hpp"
#include "vowelprompt/dsp.hpp"
#include "vowelprompt/error.hpp"

using namespace vowelprompt;

namespace {

constexpr int kSr = 16000;

struct VoicedSummary {
  std::size_t voiced = 0;
  double mean = 0.0;
  double min = 1e9;
  double max = -1e9;
};

VoicedSummary summarize(const Contour& c) {
  VoicedSummary s;
  double sum = 0.0;
  for (const auto& v : c.values) {
    if (!v) continue;
    ++s.voiced;
    sum += *v;
    s.min = std::min(s.min, *v);
    s.max = std::max(s.max, *v);
  }
  if (s.voiced) s.mean = sum / static_cast<double>(s.voiced);
  return s;
}

}  // namespace

TEST_SUITE("dsp") {
  TEST_CASE("frame layout") {
    const Contour c = intensity_contour(vptest::buffer(vptest::sine(200, 1.0, kSr), kSr));
    CHECK(c.size() == 100);
    CHECK(c.frame_hop == 0.01);
    CHECK(c.center(0) == doctest::Approx(0.005));
    CHECK(c.covered_begin() == doctest::Approx(0.0));
    CHECK(c.covered_end() == doctest::Approx(1.0));
    const Contour p = f0_contour(vptest::buffer(vptest::sine(200, 1.0, kSr), kSr), {75, 500});
    CHECK(p.size() == 100);
  }

  TEST_CASE("220 Hz sine is voiced throughout at 220 Hz") {
    const Contour c = f0_contour(vptest::buffer(vptest::sine(220, 1.0, kSr), kSr), {75, 500});
    const auto s = summarize(c);
    CHECK(s.voiced == c.size());
    CHECK(s.mean == doctest::Approx(220.0).epsilon(2.0 / 220.0));
    CHECK(s.min > 218.0);
    CHECK(s.max < 222.0);
  }

  TEST_CASE("pitch across the range and sample rates") {
    for (int sr : {8000, 16000, 44100}) {
      for (double hz : {80.0, 150.0, 310.0, 480.0}) {
        CAPTURE(sr);
        CAPTURE(hz);
        const auto s = summarize(f0_contour(vptest::buffer(vptest::sine(hz, 0.5, sr), sr), {60, 600}));
        CHECK(s.voiced > 0);
        CHECK(std::abs(s.mean - hz) < 0.01 * hz);
      }
    }
  }

  TEST_CASE("white noise is mostly unvoiced") {
    const Contour c = f0_contour(vptest::buffer(vptest::white_noise(1.0, kSr, 0.1, 7), kSr), {75, 500});
    const auto s = summarize(c);
    CHECK(static_cast<double>(s.voiced) <= 0.1 * static_cast<double>(c.size()));
  }

  TEST_CASE("silence is unvoiced and sits at the -200 dB floor") {
    const auto z = vptest::buffer(std::vector<double>(kSr, 0.0), kSr);
    CHECK(summarize(f0_contour(z, {75, 500})).voiced == 0);
    for (const auto& v : intensity_contour(z).values) CHECK(*v == doctest::Approx(-200.0));
  }

  TEST_CASE("voiced values respect the bounds") {
    // A 700 Hz tone has no period inside (75, 500); subharmonics may be found
    // but must stay in range.
    const Contour c = f0_contour(vptest::buffer(vptest::sine(700, 0.5, kSr), kSr), {75, 500});
    for (const auto& v : c.values)
      if (v) CHECK((*v >= 75.0 && *v <= 500.0));
  }

  TEST_CASE("too-short audio is rejected") {
    CHECK_THROWS_AS(f0_contour(vptest::buffer(vptest::sine(200, 0.01, kSr), kSr), {60, 600}), ValidationError);
    CHECK_THROWS_AS(intensity_contour(vptest::buffer(vptest::sine(200, 0.01, kSr), kSr)), ValidationError);
  }

  TEST_CASE("intensity of full-scale and half-scale sines") {
    const Contour full = intensity_contour(vptest::buffer(vptest::sine(220, 1.0, kSr, 1.0), kSr));
    const Contour half = intensity_contour(vptest::buffer(vptest::sine(220, 1.0, kSr, 0.5), kSr));
    const double closed_form = 20.0 * std::log10(1.0 / std::sqrt(2.0));
    REQUIRE(full.size() == half.size());
    for (std::size_t i = 0; i < full.size(); ++i) {
      CHECK(*full.values[i] == doctest::Approx(closed_form).epsilon(0.1 / 3.01));
      CHECK(*full.values[i] - *half.values[i] == doctest::Approx(20.0 * std::log10(2.0)).epsilon(0.05 / 6.02));
    }
  }

  TEST_CASE("adaptive bounds from 220 Hz tones") {
    std::vector<AudioBuffer> bufs;
    for (int i = 0; i < 3; ++i) bufs.push_back(vptest::buffer(vptest::sine(220, 0.6, kSr, 0.5), kSr));
    const PitchBounds b = adaptive_pitch_bounds(bufs);
    CHECK(std::abs(b.floor - 165.0) <= 5.0);
    CHECK(std::abs(b.ceiling - 330.0) <= 5.0);
  }

  TEST_CASE("adaptive bounds fall back for silence") {
    std::vector<AudioBuffer> bufs = {vptest::buffer(std::vector<double>(kSr, 0.0), kSr)};
    CHECK(adaptive_pitch_bounds(bufs) == PitchBounds{60.0, 600.0});
  }

  TEST_CASE("adaptive bounds for alternating 100/400 Hz tones") {
    std::vector<AudioBuffer> bufs;
    for (int i = 0; i < 4; ++i) bufs.push_back(vptest::buffer(vptest::sine(i % 2 ? 400.0 : 100.0, 1.0, kSr, 0.5), kSr));
    const PitchBounds b = adaptive_pitch_bounds(bufs);
    CHECK(std::abs(b.floor - 75.0) <= 10.0);
    CHECK(std::abs(b.ceiling - 600.0) <= 10.0);
  }

  TEST_CASE("adaptive bounds clamp to [50, 800]") {
    std::vector<AudioBuffer> low = {vptest::buffer(vptest::sine(62, 1.0, kSr, 0.5), kSr)};
    CHECK(adaptive_pitch_bounds(low).floor == 50.0);
    std::vector<AudioBuffer> high = {vptest::buffer(vptest::sine(580, 1.0, kSr, 0.5), kSr)};
    CHECK(adaptive_pitch_bounds(high).ceiling == 800.0);
  }

  TEST_CASE("adaptive bounds need input") {
    CHECK_THROWS_AS(adaptive_pitch_bounds(std::vector<AudioBuffer>{}), ValidationError);
  }
}
