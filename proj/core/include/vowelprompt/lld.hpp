#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vowelprompt/corpus.hpp"
#include "vowelprompt/dsp.hpp"

namespace vowelprompt {

/// The six vowel-level descriptors, in canonical order.
enum class FeatureId { kF0Mean = 0, kF0Slope, kF0Std, kIntensityMean, kIntensityStd, kDuration };

inline constexpr std::size_t kNumFeatures = 6;
inline constexpr std::array<FeatureId, kNumFeatures> kAllFeatures = {
    FeatureId::kF0Mean,        FeatureId::kF0Slope,       FeatureId::kF0Std,
    FeatureId::kIntensityMean, FeatureId::kIntensityStd,  FeatureId::kDuration};

std::string_view feature_name(FeatureId f);
std::optional<FeatureId> feature_from_name(std::string_view name);
constexpr bool is_pitch_feature(FeatureId f) {
  return f == FeatureId::kF0Mean || f == FeatureId::kF0Slope || f == FeatureId::kF0Std;
}
constexpr std::size_t index_of(FeatureId f) { return static_cast<std::size_t>(f); }

/// Minimum voiced frames for pitch descriptors to be meaningful.
inline constexpr int kMinVoicedFrames = 3;

struct VowelLLD {
  VowelSegment segment;
  double f0_mean = 0.0;   // Hz
  double f0_slope = 0.0;  // Hz/s, OLS over voiced frames
  double f0_std = 0.0;    // Hz, population
  double intensity_mean = 0.0;  // dBFS
  double intensity_std = 0.0;   // dB, population
  double duration = 0.0;        // s, end - start of the alignment interval
  int voiced_frames = 0;
  bool pitch_available = false;

  /// Raw value of a feature; nullopt for pitch features when pitch is unavailable.
  std::optional<double> value(FeatureId f) const;

  bool operator==(const VowelLLD&) const = default;
};

/// Reduces one segment to its descriptors from frames whose centers lie in
/// [start, end). A segment shorter than one hop that captures no frame center
/// uses the frame nearest its midpoint. Throws ValidationError when the
/// segment lies outside the contours' coverage.
VowelLLD segment_lld(const VowelSegment& segment, const Contour& f0, const Contour& intensity);

nlohmann::ordered_json lld_to_json(const VowelLLD& v);
/// Needs the utterance-level identity fields, which live on the enclosing line.
VowelLLD lld_from_json(const nlohmann::json& j, const std::string& utterance_id,
                       const std::string& speaker_id, const Language& language);

/// One line of the extract output: all vowels of an utterance.
struct UtteranceLLDs {
  std::string utterance_id;
  std::string speaker_id;
  Language language;
  PitchBounds pitch_bounds;
  std::vector<VowelLLD> vowels;

  bool operator==(const UtteranceLLDs&) const = default;
};

nlohmann::ordered_json to_json_line(const UtteranceLLDs& u);
UtteranceLLDs utterance_llds_from_json(const nlohmann::json& j);

std::vector<UtteranceLLDs> load_lld_file(const std::filesystem::path& path);
void write_lld_file(const std::filesystem::path& path, const std::vector<UtteranceLLDs>& rows);

}  // namespace vowelprompt
