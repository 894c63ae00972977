#include "vowelprompt/norm_quant.hpp"

#include <algorithm>
#include <cmath>

#include "vowelprompt/error.hpp"
#include "vowelprompt/jsonl.hpp"

namespace vowelprompt {
namespace {

using Column = std::vector<std::optional<double>>;

const MomentStats& stage_stats(const std::map<std::string, FeatureStats>& groups,
                               const std::string& key, std::size_t f, const FeatureStats& global,
                               int min_group_count) {
  if (auto it = groups.find(key); it != groups.end()) {
    const auto& s = it->second[f];
    if (s && s->count >= min_group_count) return *s;
  }
  return *global[f];
}

double zscore(double x, const MomentStats& s) {
  return (x - s.mean) / std::max(s.std, kStdEpsilon);
}

// Moments of present values, per feature.
FeatureStats column_stats(const std::array<Column, kNumFeatures>& cols,
                          const std::vector<std::size_t>& rows) {
  FeatureStats out{};
  std::vector<double> buf;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    buf.clear();
    for (std::size_t r : rows)
      if (cols[f][r]) buf.push_back(*cols[f][r]);
    if (!buf.empty()) out[f] = moments(buf);
  }
  return out;
}

// Rows grouped by key, in first-appearance order within each group.
template <typename KeyFn>
std::map<std::string, std::vector<std::size_t>> group_rows(std::size_t n, KeyFn key) {
  std::map<std::string, std::vector<std::size_t>> g;
  for (std::size_t i = 0; i < n; ++i) g[key(i)].push_back(i);
  return g;
}

std::map<std::string, FeatureStats> group_stats(
    const std::array<Column, kNumFeatures>& cols,
    const std::map<std::string, std::vector<std::size_t>>& groups) {
  std::map<std::string, FeatureStats> out;
  for (const auto& [key, rows] : groups) out.emplace(key, column_stats(cols, rows));
  return out;
}

void require_all_features(const FeatureStats& s, const char* stage) {
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    if (!s[f])
      throw ValidationError(std::string("fit: feature ") + std::string(feature_name(kAllFeatures[f])) +
                            " has no usable values (" + stage + ")");
}

nlohmann::ordered_json stats_to_json(const FeatureStats& s) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (!s[f]) continue;
    j[std::string(feature_name(kAllFeatures[f]))] = {
        {"mean", s[f]->mean}, {"std", s[f]->std}, {"count", s[f]->count}};
  }
  return j;
}

FeatureStats stats_from_json(const nlohmann::json& j) {
  FeatureStats s{};
  for (const auto& [name, body] : j.items()) {
    auto f = feature_from_name(name);
    if (!f) throw ValidationError("stats file: unknown feature \"" + name + "\"");
    MomentStats m{body.at("mean").get<double>(), body.at("std").get<double>(),
                  body.at("count").get<std::int64_t>()};
    if (m.std < 0.0 || m.count < 1) throw ValidationError("stats file: invalid moments for " + name);
    s[index_of(*f)] = m;
  }
  return s;
}

nlohmann::ordered_json groups_to_json(const std::map<std::string, FeatureStats>& g) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, s] : g) j[k] = stats_to_json(s);
  return j;
}

std::map<std::string, FeatureStats> groups_from_json(const nlohmann::json& j) {
  std::map<std::string, FeatureStats> g;
  for (const auto& [k, v] : j.items()) g.emplace(k, stats_from_json(v));
  return g;
}

}  // namespace

NormalizedValues normalize(const VowelLLD& lld, const NormQuantModel& m) {
  NormalizedValues out{};
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    auto raw = lld.value(kAllFeatures[f]);
    if (!raw) continue;
    double x = zscore(*raw, stage_stats(m.per_speaker, lld.segment.speaker_id, f, m.global_raw,
                                        m.min_group_count));
    x = zscore(x, stage_stats(m.per_vowel_type, lld.segment.ipa, f, m.global_speaker_normalized,
                              m.min_group_count));
    if (m.multilingual)
      x = zscore(x, stage_stats(m.per_language, lld.segment.language.tag(), f,
                                m.global_vowel_normalized, m.min_group_count));
    out[f] = x;
  }
  return out;
}

NormQuantModel fit(std::span<const VowelLLD> llds, int k, int min_group_count) {
  if (llds.empty()) throw ValidationError("fit: empty corpus");
  if (k < kMinBins || k > kMaxBins)
    throw ValidationError("fit: K must be in [" + std::to_string(kMinBins) + ", " +
                          std::to_string(kMaxBins) + "], got " + std::to_string(k));
  if (min_group_count < 1) throw ValidationError("fit: min_group_count must be >= 1");

  NormQuantModel m;
  m.k = k;
  m.min_group_count = min_group_count;
  m.fit_vowel_count = static_cast<std::int64_t>(llds.size());

  const std::size_t n = llds.size();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;

  std::array<Column, kNumFeatures> cols;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    cols[f].resize(n);
    for (std::size_t i = 0; i < n; ++i) cols[f][i] = llds[i].value(kAllFeatures[f]);
  }

  // Applies one z-score stage in place, using the same lookup as normalize().
  auto apply_stage = [&](const std::map<std::string, FeatureStats>& groups,
                         const FeatureStats& global, auto key_of) {
    for (std::size_t f = 0; f < kNumFeatures; ++f)
      for (std::size_t i = 0; i < n; ++i)
        if (cols[f][i])
          cols[f][i] = zscore(*cols[f][i], stage_stats(groups, key_of(i), f, global, min_group_count));
  };

  // Speaker stage.
  m.global_raw = column_stats(cols, all);
  require_all_features(m.global_raw, "raw");
  auto speaker_of = [&](std::size_t i) -> const std::string& { return llds[i].segment.speaker_id; };
  m.per_speaker = group_stats(cols, group_rows(n, speaker_of));
  apply_stage(m.per_speaker, m.global_raw, speaker_of);

  // Vowel-type stage, on speaker-normalized values.
  m.global_speaker_normalized = column_stats(cols, all);
  auto vowel_of = [&](std::size_t i) -> const std::string& { return llds[i].segment.ipa; };
  m.per_vowel_type = group_stats(cols, group_rows(n, vowel_of));
  apply_stage(m.per_vowel_type, m.global_speaker_normalized, vowel_of);

  // Language stage, only when the corpus is multilingual.
  auto language_of = [&](std::size_t i) -> const std::string& {
    return llds[i].segment.language.tag();
  };
  const auto languages = group_rows(n, language_of);
  m.multilingual = languages.size() > 1;
  if (m.multilingual) {
    m.global_vowel_normalized = column_stats(cols, all);
    m.per_language = group_stats(cols, languages);
    apply_stage(m.per_language, m.global_vowel_normalized, language_of);
  }

  std::vector<double> sorted;
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    sorted.clear();
    for (const auto& v : cols[f])
      if (v) sorted.push_back(*v);
    std::sort(sorted.begin(), sorted.end());
    auto& edges = m.quantile_edges[f];
    edges.resize(static_cast<std::size_t>(k - 1));
    for (int j = 1; j < k; ++j) edges[static_cast<std::size_t>(j - 1)] = quantile_at(sorted, j, k);
  }
  return m;
}

int assign_bin(double value, std::span<const double> edges) {
  if (!std::isfinite(value)) throw ValidationError("assign_bin: non-finite value");
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

BinnedVowel bin_segment(const VowelLLD& lld, const NormQuantModel& model) {
  BinnedVowel out;
  out.segment = lld.segment;
  const NormalizedValues z = normalize(lld, model);
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    if (z[f]) out.bins[f] = assign_bin(*z[f], model.quantile_edges[f]);
  return out;
}

nlohmann::ordered_json model_to_json(const NormQuantModel& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["k"] = m.k;
  j["min_group_count"] = m.min_group_count;
  j["multilingual"] = m.multilingual;
  j["fit_corpus_fnv1a64"] = m.fit_corpus_hash;
  j["fit_vowel_count"] = m.fit_vowel_count;
  j["global"] = {{"raw", stats_to_json(m.global_raw)},
                 {"speaker_normalized", stats_to_json(m.global_speaker_normalized)},
                 {"vowel_normalized", stats_to_json(m.global_vowel_normalized)}};
  j["per_speaker"] = groups_to_json(m.per_speaker);
  j["per_vowel_type"] = groups_to_json(m.per_vowel_type);
  j["per_language"] = groups_to_json(m.per_language);
  nlohmann::ordered_json edges = nlohmann::ordered_json::object();
  for (std::size_t f = 0; f < kNumFeatures; ++f)
    edges[std::string(feature_name(kAllFeatures[f]))] = m.quantile_edges[f];
  j["quantile_edges"] = std::move(edges);
  return j;
}

NormQuantModel model_from_json(const nlohmann::json& j) {
  NormQuantModel m;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion)
      throw ValidationError("stats file: unsupported schema_version " + std::to_string(version));
    m.k = j.at("k").get<int>();
    if (m.k < kMinBins || m.k > kMaxBins) throw ValidationError("stats file: K out of range");
    m.min_group_count = j.at("min_group_count").get<int>();
    m.multilingual = j.at("multilingual").get<bool>();
    m.fit_corpus_hash = j.value("fit_corpus_fnv1a64", std::string());
    m.fit_vowel_count = j.value("fit_vowel_count", std::int64_t{0});
    const auto& g = j.at("global");
    m.global_raw = stats_from_json(g.at("raw"));
    m.global_speaker_normalized = stats_from_json(g.at("speaker_normalized"));
    m.global_vowel_normalized = stats_from_json(g.at("vowel_normalized"));
    require_all_features(m.global_raw, "stats file global.raw");
    require_all_features(m.global_speaker_normalized, "stats file global.speaker_normalized");
    if (m.multilingual)
      require_all_features(m.global_vowel_normalized, "stats file global.vowel_normalized");
    m.per_speaker = groups_from_json(j.at("per_speaker"));
    m.per_vowel_type = groups_from_json(j.at("per_vowel_type"));
    m.per_language = groups_from_json(j.at("per_language"));
    const auto& edges = j.at("quantile_edges");
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      const std::string name(feature_name(kAllFeatures[f]));
      auto v = edges.at(name).get<std::vector<double>>();
      if (v.size() != static_cast<std::size_t>(m.k - 1) || !std::is_sorted(v.begin(), v.end()))
        throw ValidationError("stats file: edges for " + name + " must be K-1 sorted values");
      m.quantile_edges[f] = std::move(v);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("stats file: ") + e.what());
  }
  return m;
}

void save_model(const std::filesystem::path& path, const NormQuantModel& model) {
  write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

NormQuantModel load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  try {
    return model_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace vowelprompt
