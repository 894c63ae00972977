#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vowelprompt/lld.hpp"
#include "vowelprompt/stats.hpp"

namespace vowelprompt {

inline constexpr int kSchemaVersion = 1;
inline constexpr double kStdEpsilon = 1e-8;
inline constexpr int kMinBins = 2;
inline constexpr int kMaxBins = 9;

/// Per-feature moments of one group. A feature is absent when the group had
/// no usable value for it (e.g. a speaker with no voiced vowels).
using FeatureStats = std::array<std::optional<MomentStats>, kNumFeatures>;
using NormalizedValues = std::array<std::optional<double>, kNumFeatures>;

/// Fitted normalization statistics and quantile edges.
///
/// Normalization is a chain of z-scores: speaker, then vowel type (IPA), then
/// language when the fit corpus spans more than one language. Each stage's
/// statistics are computed on the output of the previous stage. A group with
/// fewer than `min_group_count` values for a feature, or one never seen at
/// fit time, is scored against that stage's global moments instead.
/// Quantile edges are global per feature over the fully normalized values.
struct NormQuantModel {
  int k = 5;
  int min_group_count = 10;
  bool multilingual = false;
  std::string fit_corpus_hash;
  std::int64_t fit_vowel_count = 0;

  FeatureStats global_raw{};
  FeatureStats global_speaker_normalized{};
  FeatureStats global_vowel_normalized{};
  std::map<std::string, FeatureStats> per_speaker;
  std::map<std::string, FeatureStats> per_vowel_type;
  std::map<std::string, FeatureStats> per_language;
  std::array<std::vector<double>, kNumFeatures> quantile_edges{};

  bool operator==(const NormQuantModel&) const = default;
};

struct BinnedVowel {
  VowelSegment segment;
  std::array<std::optional<int>, kNumFeatures> bins{};

  std::optional<int> bin(FeatureId f) const { return bins[index_of(f)]; }
  bool operator==(const BinnedVowel&) const = default;
};

/// Fits the model. Iterates in input order, so the result is bit-deterministic.
/// Throws ValidationError for an empty corpus, K outside [2, 9], or a feature
/// with no usable value.
NormQuantModel fit(std::span<const VowelLLD> llds, int k = 5, int min_group_count = 10);

NormalizedValues normalize(const VowelLLD& lld, const NormQuantModel& model);

/// Number of edges strictly below `value`: boundary values fall to the lower
/// bin. Throws ValidationError for a non-finite value.
int assign_bin(double value, std::span<const double> edges);

BinnedVowel bin_segment(const VowelLLD& lld, const NormQuantModel& model);

nlohmann::ordered_json model_to_json(const NormQuantModel& model);
NormQuantModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const NormQuantModel& model);
NormQuantModel load_model(const std::filesystem::path& path);

}  // namespace vowelprompt
