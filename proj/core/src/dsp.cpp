#include "vowelprompt/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vowelprompt/error.hpp"
#include "vowelprompt/stats.hpp"

namespace vowelprompt {
namespace {

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i + 1) /
                                static_cast<double>(n + 1));
  return w;
}

struct FrameGrid {
  std::size_t count = 0;
  double hop = 0.0;

  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * hop; }
};

FrameGrid make_grid(const AudioBuffer& audio, double hop) {
  FrameGrid g;
  g.hop = hop;
  g.count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(audio.duration() / hop - 1e-9)));
  return g;
}

// First sample of a window of `len` samples centered at `t`, shifted to stay
// inside the signal.
std::size_t window_start(double t, int fs, std::size_t len, std::size_t total) {
  const double ideal = std::round(t * fs) - static_cast<double>(len) / 2.0;
  const double max_start = static_cast<double>(total - len);
  return static_cast<std::size_t>(std::clamp(ideal, 0.0, max_start));
}

void check_audio(const AudioBuffer& audio) {
  if (audio.sample_rate <= 0) throw ValidationError("audio has no sample rate");
}

}  // namespace

Contour f0_contour(const AudioBuffer& audio, const PitchBounds& bounds, const PitchConfig& cfg) {
  check_audio(audio);
  if (!(bounds.floor > 0.0 && bounds.floor < bounds.ceiling))
    throw ValidationError("pitch bounds must satisfy 0 < floor < ceiling");
  if (!(cfg.hop_s > 0.0)) throw ValidationError("pitch.hop_s must be positive");

  const int fs = audio.sample_rate;
  const auto win = static_cast<std::size_t>(std::lround(cfg.periods_per_window / bounds.floor * fs));
  const std::size_t total = audio.samples.size();
  if (total < win)
    throw ValidationError("audio shorter than one pitch analysis window (" +
                          std::to_string(static_cast<double>(win) / fs) + " s)");

  const FrameGrid grid = make_grid(audio, cfg.hop_s);
  Contour out;
  out.frame_hop = grid.hop;
  out.first_frame_center = grid.center(0);
  out.values.assign(grid.count, std::nullopt);

  double global_peak = 0.0;
  for (double s : audio.samples) global_peak = std::max(global_peak, std::abs(s));
  if (global_peak <= 0.0) return out;

  const double min_lag_s = 1.0 / bounds.ceiling;
  const double max_lag_s = 1.0 / bounds.floor;
  const auto lag_lo = std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(min_lag_s * fs)));
  const auto lag_hi = std::min(win - 2, static_cast<std::size_t>(std::ceil(max_lag_s * fs)));
  if (lag_lo >= lag_hi) throw ValidationError("sample rate too low for the pitch bounds");

  const std::vector<double> w = hann(win);
  // Window autocorrelation, normalized to 1 at lag 0.
  std::vector<double> rw(lag_hi + 2, 0.0);
  for (std::size_t lag = 0; lag < rw.size(); ++lag) {
    double acc = 0.0;
    for (std::size_t n = 0; n + lag < win; ++n) acc += w[n] * w[n + lag];
    rw[lag] = acc;
  }
  for (std::size_t lag = rw.size(); lag-- > 0;) rw[lag] /= rw[0];

  std::vector<double> frame(win);
  std::vector<double> r(lag_hi + 2, 0.0);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const std::size_t s0 = window_start(grid.center(i), fs, win, total);
    double mean = 0.0;
    for (std::size_t n = 0; n < win; ++n) mean += audio.samples[s0 + n];
    mean /= static_cast<double>(win);
    double local_peak = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      const double v = audio.samples[s0 + n] - mean;
      local_peak = std::max(local_peak, std::abs(v));
      frame[n] = v * w[n];
    }
    if (local_peak < cfg.silence_threshold * global_peak) continue;

    double r0 = 0.0;
    for (double v : frame) r0 += v * v;
    if (r0 <= 0.0) continue;
    for (std::size_t lag = lag_lo - 1; lag <= lag_hi + 1; ++lag) {
      double acc = 0.0;
      for (std::size_t n = 0; n + lag < win; ++n) acc += frame[n] * frame[n + lag];
      r[lag] = acc / r0 / rw[lag];
    }

    double best_strength = -1e300;
    double best_r = 0.0;
    double best_lag = 0.0;
    for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
      if (!(r[lag] >= r[lag - 1] && r[lag] > r[lag + 1])) continue;
      const double a = r[lag - 1];
      const double b = r[lag];
      const double c = r[lag + 1];
      const double denom = a - 2.0 * b + c;
      double delta = 0.0;
      if (denom < 0.0) delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
      const double refined_lag = static_cast<double>(lag) + delta;
      const double refined_r = b - 0.25 * (a - c) * delta;
      const double strength =
          refined_r - cfg.octave_cost * std::log2(bounds.floor * refined_lag / fs);
      if (strength > best_strength) {
        best_strength = strength;
        best_r = refined_r;
        best_lag = refined_lag;
      }
    }
    if (best_lag <= 0.0 || best_r < cfg.voicing_threshold) continue;
    out.values[i] = std::clamp(fs / best_lag, bounds.floor, bounds.ceiling);
  }

  // 3-frame median inside voiced runs.
  std::vector<std::optional<double>> smoothed = out.values;
  for (std::size_t i = 1; i + 1 < out.values.size(); ++i) {
    if (!out.values[i - 1] || !out.values[i] || !out.values[i + 1]) continue;
    double v[3] = {*out.values[i - 1], *out.values[i], *out.values[i + 1]};
    std::sort(v, v + 3);
    smoothed[i] = v[1];
  }
  out.values = std::move(smoothed);
  return out;
}

Contour intensity_contour(const AudioBuffer& audio, const IntensityConfig& cfg) {
  check_audio(audio);
  if (!(cfg.hop_s > 0.0) || !(cfg.window_s > 0.0))
    throw ValidationError("intensity window and hop must be positive");
  const int fs = audio.sample_rate;
  const auto win = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.window_s * fs)));
  const std::size_t total = audio.samples.size();
  if (total < win) throw ValidationError("audio shorter than one intensity window");

  const std::vector<double> w = hann(win);
  double wsum = 0.0;
  for (double v : w) wsum += v;

  const FrameGrid grid = make_grid(audio, cfg.hop_s);
  Contour out;
  out.frame_hop = grid.hop;
  out.first_frame_center = grid.center(0);
  out.values.resize(grid.count);
  for (std::size_t i = 0; i < grid.count; ++i) {
    const std::size_t s0 = window_start(grid.center(i), fs, win, total);
    double acc = 0.0;
    for (std::size_t n = 0; n < win; ++n) {
      const double x = audio.samples[s0 + n];
      acc += w[n] * x * x;
    }
    const double rms = std::sqrt(acc / wsum);
    out.values[i] = 20.0 * std::log10(std::max(rms, 1e-10));
  }
  return out;
}

PitchBounds adaptive_pitch_bounds(std::span<const AudioBuffer> speaker_audio,
                                  const PitchConfig& cfg) {
  if (speaker_audio.empty()) throw ValidationError("adaptive_pitch_bounds: no audio for speaker");
  const PitchBounds generic{cfg.floor_hz, cfg.ceiling_hz};

  std::vector<double> voiced;
  for (const AudioBuffer& a : speaker_audio) {
    const double window_s = cfg.periods_per_window / generic.floor;
    if (a.sample_rate <= 0 || a.duration() < window_s) continue;
    const Contour c = f0_contour(a, generic, cfg);
    for (const auto& v : c.values)
      if (v) voiced.push_back(*v);
  }
  if (voiced.size() < 10) return generic;

  std::sort(voiced.begin(), voiced.end());
  PitchBounds b;
  b.floor = std::clamp(0.75 * quantile_at(voiced, 1, 4), 50.0, 800.0);
  b.ceiling = std::clamp(1.5 * quantile_at(voiced, 3, 4), 50.0, 800.0);
  if (!(b.floor < b.ceiling)) return generic;
  return b;
}

}  // namespace vowelprompt
