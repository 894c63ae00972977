#include "vowelprompt/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vowelprompt/error.hpp"
#include "vowelprompt/norm_quant.hpp"

namespace vowelprompt {
namespace {

using nlohmann::json;

// Typed access to one JSON object, rejecting keys it was never asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [key, _] : j_.items())
      if (!known.contains(key))
        throw ValidationError("config: unknown key \"" + qualified(key) + "\"");
  }

  template <typename T>
  void get(const char* key, T& out) const {
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ValidationError("config: wrong type for \"" + qualified(key) + "\"");
    }
  }

  std::optional<Section> sub(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, qualified(key));
  }

  bool has(const char* key) const { return j_.contains(key); }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return "config: " + (path_.empty() ? std::string("top level") : path_) + ": "; }

  const json& j_;
  std::string path_;
};

// Integer fields must not silently truncate 2.5 to 2.
void get_int(const Section& s, const char* key, int& out, const json& raw) {
  if (!s.has(key)) return;
  if (!raw.at(key).is_number_integer()) throw ValidationError(std::string("config: \"") + key + "\" must be an integer");
  s.get(key, out);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError("config: " + msg);
}

}  // namespace

void PipelineConfig::validate() const {
  require(pitch.hop_s > 0.0, "pitch.hop_s must be positive");
  require(pitch.voicing_threshold > 0.0 && pitch.voicing_threshold < 1.0,
          "pitch.voicing_threshold must be in (0, 1)");
  require(pitch.floor_hz > 0.0 && pitch.floor_hz < pitch.ceiling_hz,
          "pitch.floor_hz must be positive and below pitch.ceiling_hz");
  require(pitch.periods_per_window >= 1.0, "pitch.periods_per_window must be >= 1");
  require(pitch.octave_cost >= 0.0, "pitch.octave_cost must be >= 0");
  require(pitch.silence_threshold >= 0.0 && pitch.silence_threshold < 1.0,
          "pitch.silence_threshold must be in [0, 1)");
  require(intensity.window_s > 0.0, "intensity.window_s must be positive");
  require(intensity.hop_s > 0.0, "intensity.hop_s must be positive");
  require(k >= kMinBins && k <= kMaxBins, "k must be in [2, 9]");
  require(min_group_count >= 1, "min_group_count must be >= 1");
  require(!tiers.phones.empty() && !tiers.words.empty(), "tier names must be non-empty");
  require(!label_set.empty(), "label_set must be non-empty");
  require(std::set<std::string>(label_set.begin(), label_set.end()).size() == label_set.size(),
          "label_set has duplicates");
  require(shots >= 1, "shots must be >= 1");
  require(gateway.max_concurrency >= 1, "gateway.max_concurrency must be >= 1");
  require(gateway.max_retries >= 0 && gateway.max_retries <= 10, "gateway.max_retries must be in [0, 10]");
  require(gateway.timeout_s > 0.0, "gateway.timeout_s must be positive");
  require(gateway.temperature >= 0.0, "gateway.temperature must be >= 0");
}

PipelineConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  Section top(doc, "");
  top.allow({"pitch", "intensity", "k", "min_group_count", "tiers", "lexicon_path", "phone_map_path",
             "label_set", "template", "shots", "gateway"});

  if (auto s = top.sub("pitch")) {
    s->allow({"hop_s", "voicing_threshold", "floor_hz", "ceiling_hz", "periods_per_window", "octave_cost",
              "silence_threshold"});
    s->get("hop_s", c.pitch.hop_s);
    s->get("voicing_threshold", c.pitch.voicing_threshold);
    s->get("floor_hz", c.pitch.floor_hz);
    s->get("ceiling_hz", c.pitch.ceiling_hz);
    s->get("periods_per_window", c.pitch.periods_per_window);
    s->get("octave_cost", c.pitch.octave_cost);
    s->get("silence_threshold", c.pitch.silence_threshold);
  }
  if (auto s = top.sub("intensity")) {
    s->allow({"window_s", "hop_s"});
    s->get("window_s", c.intensity.window_s);
    s->get("hop_s", c.intensity.hop_s);
  }
  get_int(top, "k", c.k, doc);
  get_int(top, "min_group_count", c.min_group_count, doc);
  if (auto s = top.sub("tiers")) {
    s->allow({"phones", "words"});
    s->get("phones", c.tiers.phones);
    s->get("words", c.tiers.words);
  }
  auto resolve = [&](const char* key) -> std::optional<std::filesystem::path> {
    if (!top.has(key)) return std::nullopt;
    std::string p;
    top.get(key, p);
    require(!p.empty(), std::string(key) + " must be non-empty");
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  c.lexicon_path = resolve("lexicon_path");
  c.phone_map_path = resolve("phone_map_path");
  top.get("label_set", c.label_set);
  if (top.has("template")) {
    std::string name;
    top.get("template", name);
    auto id = template_from_name(name);
    require(id.has_value(), "unknown template \"" + name + "\"; valid ids: " + template_names_joined());
    c.template_id = *id;
  }
  get_int(top, "shots", c.shots, doc);
  if (auto s = top.sub("gateway")) {
    s->allow({"base_url", "model", "max_concurrency", "timeout_s", "max_retries", "temperature",
              "backoff_base_s", "backoff_factor"});
    const json& g = doc.at("gateway");
    s->get("base_url", c.gateway.base_url);
    s->get("model", c.gateway.model_name);
    get_int(*s, "max_concurrency", c.gateway.max_concurrency, g);
    s->get("timeout_s", c.gateway.timeout_s);
    get_int(*s, "max_retries", c.gateway.max_retries, g);
    s->get("temperature", c.gateway.temperature);
    s->get("backoff_base_s", c.gateway.backoff_base_s);
    s->get("backoff_factor", c.gateway.backoff_factor);
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(doc, path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace vowelprompt
