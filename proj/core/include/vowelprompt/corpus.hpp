#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vowelprompt/phone_map.hpp"
#include "vowelprompt/textgrid.hpp"

namespace vowelprompt {

struct ContextTurn {
  std::string speaker;
  std::string text;

  bool operator==(const ContextTurn&) const = default;
};

/// One manifest line.
struct UtteranceEntry {
  std::string utterance_id;
  std::string speaker_id;
  Language language;
  std::filesystem::path audio_path;
  std::filesystem::path alignment_path;
  std::string transcript;
  std::vector<ContextTurn> context;
  std::optional<std::string> label;

  bool operator==(const UtteranceEntry&) const = default;
};

void to_json(nlohmann::json& j, const UtteranceEntry& e);
void from_json(const nlohmann::json& j, UtteranceEntry& e);

/// Reads a JSONL manifest. Relative audio/alignment paths are resolved against
/// the manifest's directory. Throws ValidationError on duplicate ids or
/// missing fields, naming the line.
std::vector<UtteranceEntry> load_manifest(const std::filesystem::path& path);

/// One aligned vowel nucleus.
struct VowelSegment {
  std::string utterance_id;
  std::string speaker_id;
  Language language;
  std::string ipa;
  std::string word;
  double start = 0.0;
  double end = 0.0;
  int index_in_utterance = 0;

  double duration() const { return end - start; }
  bool operator==(const VowelSegment&) const = default;
};

struct TierNames {
  std::string phones = "phones";
  std::string words = "words";
};

/// Selects phone intervals whose label maps to an IPA vowel. The host word is
/// the words-tier interval containing the vowel midpoint (empty if there is no
/// words tier). Throws StructuralError for a missing phones tier or
/// overlapping phone intervals.
std::vector<VowelSegment> extract_vowel_segments(const UtteranceEntry& entry,
                                                 const AlignmentDoc& doc,
                                                 const PhoneMap& phones = PhoneMap::builtin(),
                                                 const TierNames& tiers = {});

}  // namespace vowelprompt
