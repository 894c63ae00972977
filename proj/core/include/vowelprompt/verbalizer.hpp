#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vowelprompt/norm_quant.hpp"

namespace vowelprompt {

/// Ordinal label scales for one bin count K. Index 0 is the lowest bin.
struct DescriptorLexicon {
  std::vector<std::string> level_labels;      // mean pitch, mean intensity
  std::vector<std::string> slope_labels;      // pitch slope
  std::vector<std::string> variation_labels;  // pitch and intensity spread
  std::vector<std::string> duration_labels;
  std::string unavailable_pitch_text = "pitch unavailable (unvoiced)";

  int k() const { return static_cast<int>(level_labels.size()); }

  /// Throws ValidationError unless every list has K unique entries.
  void validate() const;

  /// Selects the scale for K from a lexicon document (see core/data/lexicon.json).
  static DescriptorLexicon from_json(const nlohmann::json& doc, int k);
  static DescriptorLexicon load(const std::filesystem::path& path, int k);
  /// Scale for K from the compiled-in lexicon.
  static DescriptorLexicon builtin(int k = 5);
};

/// Renders one vowel as
///   word "<w>" vowel /<ipa>/ (<start>–<end>s): pitch <level>, <slope>,
///   pitch variation <variation>, intensity <level>, intensity <variation>,
///   duration <duration>
/// on a single line, times to two decimals. Missing pitch bins replace the
/// three pitch clauses with the lexicon's unavailable text.
/// Throws ValidationError when a bin is outside the lexicon's K.
std::string descriptor_for_vowel(const BinnedVowel& b, const DescriptorLexicon& lexicon);

/// One descriptor line per vowel, newline-separated; "" for no vowels.
/// Throws StructuralError unless vowels are ordered by index_in_utterance.
std::string utterance_block(std::span<const BinnedVowel> vowels, const DescriptorLexicon& lexicon);

}  // namespace vowelprompt
