#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vowelprompt/corpus.hpp"
#include "vowelprompt/dsp.hpp"
#include "vowelprompt/gateway.hpp"
#include "vowelprompt/prompt.hpp"

namespace vowelprompt {

/// Settings shared by every subcommand. All fields have defaults, so an empty
/// JSON object is a valid config. See core/data/config.example.json.
struct PipelineConfig {
  PitchConfig pitch;
  IntensityConfig intensity;
  int k = 5;
  int min_group_count = 10;
  TierNames tiers;
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> phone_map_path;
  std::vector<std::string> label_set = default_label_set();
  PromptTemplateId template_id = PromptTemplateId::kZeroShotVowel;
  int shots = static_cast<int>(kDefaultShots);
  /// api_key is never read from the file; it comes from the environment.
  GatewayConfig gateway;

  /// Range checks shared by file and flag overrides. Throws ValidationError.
  void validate() const;
};

/// Parses a config document. Unknown keys at any level are rejected, and
/// relative paths are resolved against `base_dir`. Throws ValidationError
/// naming the offending key.
PipelineConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file. Throws IoError or ValidationError.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace vowelprompt
