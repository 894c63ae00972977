#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

namespace vowelprompt {

/// Corpus language. `other` carries a free-form tag (e.g. "es").
class Language {
 public:
  enum class Code { kEn, kFr, kDe, kOther };

  Language() = default;
  static Language parse(std::string_view tag);

  Code code() const { return code_; }
  /// "en", "fr", "de", or the original tag for other languages.
  const std::string& tag() const { return tag_; }

  bool operator==(const Language&) const = default;
  auto operator<=>(const Language& o) const { return tag_ <=> o.tag_; }

 private:
  Code code_ = Code::kEn;
  std::string tag_ = "en";
};

/// Aligner phone label to IPA vowel lookup, loaded from the shipped JSON
/// data file. Unknown labels and consonants map to nullopt.
class PhoneMap {
 public:
  struct LanguageTable {
    bool strip_stress_digits = false;
    std::map<std::string, std::string, std::less<>> map;
    std::set<std::string, std::less<>> ipa_vowels;
  };

  static PhoneMap from_json(const nlohmann::json& doc);
  static PhoneMap load(const std::filesystem::path& path);
  /// The compiled-in copy of core/data/phone_map.json.
  static const PhoneMap& builtin();

  std::optional<std::string> to_ipa(std::string_view phone_label, const Language& lang) const;

  /// IPA inventory of a language (falls back to the "other" table).
  const std::set<std::string, std::less<>>& inventory(const Language& lang) const;

 private:
  const LanguageTable& table(const Language& lang) const;

  std::map<std::string, LanguageTable, std::less<>> tables_;
};

/// Removes trailing ARPAbet stress digits (0, 1, 2).
std::string_view strip_stress(std::string_view label);

}  // namespace vowelprompt
