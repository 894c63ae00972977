#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "vowelprompt/audio.hpp"

namespace vowelprompt {

/// Frame-level track. Pitch frames may be unvoiced (nullopt); intensity
/// frames are always populated. Frame i is centered at
/// first_frame_center + i * frame_hop.
struct Contour {
  std::vector<std::optional<double>> values;
  double frame_hop = 0.01;
  double first_frame_center = 0.005;

  std::size_t size() const { return values.size(); }
  double center(std::size_t i) const {
    return first_frame_center + static_cast<double>(i) * frame_hop;
  }
  /// Time span [begin, end) represented by the frames.
  double covered_begin() const { return first_frame_center - 0.5 * frame_hop; }
  double covered_end() const { return center(values.size()) - 0.5 * frame_hop; }
};

struct PitchBounds {
  double floor = 60.0;
  double ceiling = 600.0;

  bool operator==(const PitchBounds&) const = default;
};

struct PitchConfig {
  double hop_s = 0.01;
  double voicing_threshold = 0.45;
  /// Generic bounds of the first, speaker-independent pass.
  double floor_hz = 60.0;
  double ceiling_hz = 600.0;
  /// Analysis window length in periods of the pitch floor.
  double periods_per_window = 3.0;
  /// Penalty per octave below the ceiling, favouring the shortest plausible lag.
  double octave_cost = 0.01;
  /// Frames whose peak amplitude is below this fraction of the signal's global
  /// peak are unvoiced.
  double silence_threshold = 0.03;
};

struct IntensityConfig {
  double window_s = 0.04;
  double hop_s = 0.01;
};

/// Autocorrelation pitch tracker in the style of Boersma (1993). Each Hann
/// frame's autocorrelation is divided by the window's own; the best peak is
/// refined parabolically and kept if it clears the voicing threshold. Voiced
/// runs then get a 3-frame median. Frames whose window would cross the signal edge are shifted
/// inward, so every frame sees a full window of real samples.
/// Requires at least one analysis window of audio (ValidationError otherwise).
Contour f0_contour(const AudioBuffer& audio, const PitchBounds& bounds,
                   const PitchConfig& cfg = {});

/// Hann-windowed RMS in dB re full scale: 20 log10(max(rms, 1e-10)), where
/// rms = sqrt(sum w x^2 / sum w). Same frame layout as f0_contour.
Contour intensity_contour(const AudioBuffer& audio, const IntensityConfig& cfg = {});

/// Speaker-adaptive bounds: a generic first pass, then floor = 0.75 * P25 and
/// ceiling = 1.5 * P75 of voiced F0, clamped to [50, 800] Hz. Falls back to
/// the generic bounds with fewer than 10 voiced frames. Buffers shorter than
/// one analysis window are skipped. Throws ValidationError on an empty list.
PitchBounds adaptive_pitch_bounds(std::span<const AudioBuffer> speaker_audio,
                                  const PitchConfig& cfg = {});

}  // namespace vowelprompt
