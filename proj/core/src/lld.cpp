#include "vowelprompt/lld.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vowelprompt/error.hpp"
#include "vowelprompt/jsonl.hpp"
#include "vowelprompt/stats.hpp"

namespace vowelprompt {
namespace {

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "f0_mean", "f0_slope", "f0_std", "intensity_mean", "intensity_std", "duration"};

void check_coverage(const VowelSegment& s, const Contour& c, const char* what) {
  if (c.size() == 0) throw ValidationError(std::string(what) + " contour is empty");
  // Aligners may end the last interval a little past the audio; allow one hop.
  if (s.start < c.covered_begin() - 1e-9 || s.end > c.covered_end() + c.frame_hop)
    throw ValidationError(s.utterance_id + ": vowel [" + std::to_string(s.start) + ", " +
                          std::to_string(s.end) + ") outside " + what + " contour coverage");
}

std::vector<std::size_t> frames_in(const Contour& c, double start, double end) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double t = c.center(i);
    if (t >= start && t < end) idx.push_back(i);
  }
  if (idx.empty()) {
    const double mid = 0.5 * (start + end);
    const double pos = std::round((mid - c.first_frame_center) / c.frame_hop);
    const auto i = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(c.size() - 1)));
    idx.push_back(i);
  }
  return idx;
}

nlohmann::json nullable(bool present, double v) {
  return present ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double number_or_zero(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? 0.0 : v.get<double>();
}

}  // namespace

std::string_view feature_name(FeatureId f) { return kFeatureNames[index_of(f)]; }

std::optional<FeatureId> feature_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (kFeatureNames[i] == name) return kAllFeatures[i];
  return std::nullopt;
}

std::optional<double> VowelLLD::value(FeatureId f) const {
  if (is_pitch_feature(f) && !pitch_available) return std::nullopt;
  switch (f) {
    case FeatureId::kF0Mean: return f0_mean;
    case FeatureId::kF0Slope: return f0_slope;
    case FeatureId::kF0Std: return f0_std;
    case FeatureId::kIntensityMean: return intensity_mean;
    case FeatureId::kIntensityStd: return intensity_std;
    case FeatureId::kDuration: return duration;
  }
  return std::nullopt;
}

VowelLLD segment_lld(const VowelSegment& segment, const Contour& f0, const Contour& intensity) {
  if (!(segment.end > segment.start))
    throw ValidationError(segment.utterance_id + ": vowel segment has non-positive duration");
  check_coverage(segment, f0, "pitch");
  check_coverage(segment, intensity, "intensity");

  VowelLLD out;
  out.segment = segment;
  out.duration = segment.end - segment.start;

  std::vector<double> times;
  std::vector<double> hz;
  for (std::size_t i : frames_in(f0, segment.start, segment.end)) {
    if (f0.values[i]) {
      times.push_back(f0.center(i));
      hz.push_back(*f0.values[i]);
    }
  }
  out.voiced_frames = static_cast<int>(hz.size());
  out.pitch_available = out.voiced_frames >= kMinVoicedFrames;
  if (out.pitch_available) {
    const MomentStats m = moments(hz);
    out.f0_mean = m.mean;
    out.f0_std = m.std;
    out.f0_slope = ols_slope(times, hz);
  }

  std::vector<double> db;
  for (std::size_t i : frames_in(intensity, segment.start, segment.end))
    if (intensity.values[i]) db.push_back(*intensity.values[i]);
  const MomentStats im = moments(db);
  out.intensity_mean = im.mean;
  out.intensity_std = im.std;
  return out;
}

nlohmann::ordered_json lld_to_json(const VowelLLD& v) {
  nlohmann::ordered_json j;
  j["index"] = v.segment.index_in_utterance;
  j["ipa"] = v.segment.ipa;
  j["word"] = v.segment.word;
  j["start"] = v.segment.start;
  j["end"] = v.segment.end;
  j["f0_mean"] = nullable(v.pitch_available, v.f0_mean);
  j["f0_slope"] = nullable(v.pitch_available, v.f0_slope);
  j["f0_std"] = nullable(v.pitch_available, v.f0_std);
  j["intensity_mean"] = v.intensity_mean;
  j["intensity_std"] = v.intensity_std;
  j["duration"] = v.duration;
  j["voiced_frames"] = v.voiced_frames;
  j["pitch_available"] = v.pitch_available;
  return j;
}

VowelLLD lld_from_json(const nlohmann::json& j, const std::string& utterance_id,
                       const std::string& speaker_id, const Language& language) {
  VowelLLD v;
  v.segment.utterance_id = utterance_id;
  v.segment.speaker_id = speaker_id;
  v.segment.language = language;
  v.segment.index_in_utterance = j.at("index").get<int>();
  v.segment.ipa = j.at("ipa").get<std::string>();
  v.segment.word = j.at("word").get<std::string>();
  v.segment.start = j.at("start").get<double>();
  v.segment.end = j.at("end").get<double>();
  v.pitch_available = j.at("pitch_available").get<bool>();
  v.voiced_frames = j.at("voiced_frames").get<int>();
  if (v.pitch_available) {
    v.f0_mean = j.at("f0_mean").get<double>();
    v.f0_slope = j.at("f0_slope").get<double>();
    v.f0_std = j.at("f0_std").get<double>();
  } else {
    v.f0_mean = number_or_zero(j, "f0_mean");
    v.f0_slope = number_or_zero(j, "f0_slope");
    v.f0_std = number_or_zero(j, "f0_std");
  }
  v.intensity_mean = j.at("intensity_mean").get<double>();
  v.intensity_std = j.at("intensity_std").get<double>();
  v.duration = j.at("duration").get<double>();
  if (!(v.duration > 0.0)) throw ValidationError("vowel duration must be positive");
  if (v.f0_std < 0.0 || v.intensity_std < 0.0)
    throw ValidationError("standard deviations must be non-negative");
  return v;
}

nlohmann::ordered_json to_json_line(const UtteranceLLDs& u) {
  nlohmann::ordered_json j;
  j["utterance_id"] = u.utterance_id;
  j["speaker_id"] = u.speaker_id;
  j["language"] = u.language.tag();
  j["pitch_floor_hz"] = u.pitch_bounds.floor;
  j["pitch_ceiling_hz"] = u.pitch_bounds.ceiling;
  j["vowels"] = nlohmann::ordered_json::array();
  for (const auto& v : u.vowels) j["vowels"].push_back(lld_to_json(v));
  return j;
}

UtteranceLLDs utterance_llds_from_json(const nlohmann::json& j) {
  UtteranceLLDs u;
  u.utterance_id = j.at("utterance_id").get<std::string>();
  u.speaker_id = j.at("speaker_id").get<std::string>();
  u.language = Language::parse(j.at("language").get<std::string>());
  u.pitch_bounds.floor = j.value("pitch_floor_hz", 60.0);
  u.pitch_bounds.ceiling = j.value("pitch_ceiling_hz", 600.0);
  for (const auto& v : j.at("vowels"))
    u.vowels.push_back(lld_from_json(v, u.utterance_id, u.speaker_id, u.language));
  for (std::size_t i = 0; i < u.vowels.size(); ++i)
    if (u.vowels[i].segment.index_in_utterance != static_cast<int>(i))
      throw ValidationError(u.utterance_id + ": vowel indices must be consecutive from 0");
  return u;
}

std::vector<UtteranceLLDs> load_lld_file(const std::filesystem::path& path) {
  std::vector<UtteranceLLDs> rows;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    rows.push_back(utterance_llds_from_json(j));
  });
  return rows;
}

void write_lld_file(const std::filesystem::path& path, const std::vector<UtteranceLLDs>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) os << to_json_line(r).dump() << '\n';
  write_file_atomic(path, os.str());
}

}  // namespace vowelprompt
