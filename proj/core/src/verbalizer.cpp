#include "vowelprompt/verbalizer.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "vowelprompt/error.hpp"

namespace vowelprompt {

namespace embedded {
extern const std::string_view kLexiconJson;
}

namespace {

void check_list(const std::vector<std::string>& labels, std::size_t k, const char* name) {
  if (labels.size() != k)
    throw ValidationError(std::string("lexicon: ") + name + " has " + std::to_string(labels.size()) +
                          " labels, expected " + std::to_string(k));
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw ValidationError(std::string("lexicon: ") + name + " labels are not unique");
}

const std::string& label_at(const std::vector<std::string>& labels, int bin) {
  if (bin < 0 || static_cast<std::size_t>(bin) >= labels.size())
    throw ValidationError("bin " + std::to_string(bin) + " outside lexicon range [0, " +
                          std::to_string(labels.size()) + ")");
  return labels[static_cast<std::size_t>(bin)];
}

std::string two_decimals(double t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", t);
  return buf;
}

}  // namespace

void DescriptorLexicon::validate() const {
  const std::size_t k = level_labels.size();
  if (k < static_cast<std::size_t>(kMinBins) || k > static_cast<std::size_t>(kMaxBins))
    throw ValidationError("lexicon: K must be in [2, 9]");
  check_list(level_labels, k, "level");
  check_list(slope_labels, k, "slope");
  check_list(variation_labels, k, "variation");
  check_list(duration_labels, k, "duration");
  if (unavailable_pitch_text.empty()) throw ValidationError("lexicon: empty unavailable_pitch_text");
}

DescriptorLexicon DescriptorLexicon::from_json(const nlohmann::json& doc, int k) {
  DescriptorLexicon lex;
  try {
    const auto& scales = doc.at("scales");
    const std::string key = std::to_string(k);
    if (!scales.contains(key)) throw ValidationError("lexicon: no label scale for K=" + key);
    const auto& s = scales.at(key);
    lex.level_labels = s.at("level").get<std::vector<std::string>>();
    lex.slope_labels = s.at("slope").get<std::vector<std::string>>();
    lex.variation_labels = s.at("variation").get<std::vector<std::string>>();
    lex.duration_labels = s.at("duration").get<std::vector<std::string>>();
    lex.unavailable_pitch_text =
        doc.value("unavailable_pitch_text", std::string("pitch unavailable (unvoiced)"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("lexicon: ") + e.what());
  }
  lex.validate();
  if (lex.k() != k) throw ValidationError("lexicon: scale size does not match K");
  return lex;
}

DescriptorLexicon DescriptorLexicon::load(const std::filesystem::path& path, int k) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open lexicon " + path.string());
  try {
    return from_json(nlohmann::json::parse(in), k);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

DescriptorLexicon DescriptorLexicon::builtin(int k) {
  static const nlohmann::json doc = nlohmann::json::parse(embedded::kLexiconJson);
  return from_json(doc, k);
}

std::string descriptor_for_vowel(const BinnedVowel& b, const DescriptorLexicon& lex) {
  const VowelSegment& s = b.segment;
  std::string out;
  out.reserve(160);
  out += "word \"";
  out += s.word;
  out += "\" vowel /";
  out += s.ipa;
  out += "/ (";
  out += two_decimals(s.start);
  out += "–";
  out += two_decimals(s.end);
  out += "s): ";

  const auto f0 = b.bin(FeatureId::kF0Mean);
  const auto slope = b.bin(FeatureId::kF0Slope);
  const auto f0_std = b.bin(FeatureId::kF0Std);
  if (f0 && slope && f0_std) {
    out += "pitch " + label_at(lex.level_labels, *f0) + ", ";
    out += label_at(lex.slope_labels, *slope) + ", ";
    out += "pitch variation " + label_at(lex.variation_labels, *f0_std) + ", ";
  } else {
    out += lex.unavailable_pitch_text + ", ";
  }

  const auto im = b.bin(FeatureId::kIntensityMean);
  const auto is = b.bin(FeatureId::kIntensityStd);
  const auto du = b.bin(FeatureId::kDuration);
  if (!im || !is || !du) throw ValidationError("intensity and duration bins are always required");
  out += "intensity " + label_at(lex.level_labels, *im) + ", ";
  out += "intensity " + label_at(lex.variation_labels, *is) + ", ";
  out += "duration " + label_at(lex.duration_labels, *du);
  return out;
}

std::string utterance_block(std::span<const BinnedVowel> vowels, const DescriptorLexicon& lex) {
  std::string out;
  for (std::size_t i = 0; i < vowels.size(); ++i) {
    if (i > 0 && vowels[i].segment.index_in_utterance <= vowels[i - 1].segment.index_in_utterance)
      throw StructuralError("utterance_block: vowels not sorted by index_in_utterance");
    if (i > 0) out.push_back('\n');
    out += descriptor_for_vowel(vowels[i], lex);
  }
  return out;
}

}  // namespace vowelprompt
