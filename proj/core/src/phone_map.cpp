#include "vowelprompt/phone_map.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "vowelprompt/error.hpp"

namespace vowelprompt {

namespace embedded {
extern const std::string_view kPhoneMapJson;
}

Language Language::parse(std::string_view tag) {
  Language l;
  if (tag.empty()) throw ValidationError("empty language tag");
  l.tag_ = std::string(tag);
  if (tag == "en") l.code_ = Code::kEn;
  else if (tag == "fr") l.code_ = Code::kFr;
  else if (tag == "de") l.code_ = Code::kDe;
  else l.code_ = Code::kOther;
  return l;
}

std::string_view strip_stress(std::string_view label) {
  while (!label.empty() && (label.back() == '0' || label.back() == '1' || label.back() == '2'))
    label.remove_suffix(1);
  return label;
}

PhoneMap PhoneMap::from_json(const nlohmann::json& doc) {
  PhoneMap pm;
  try {
    for (const auto& [lang, body] : doc.at("languages").items()) {
      LanguageTable t;
      t.strip_stress_digits = body.value("strip_stress_digits", false);
      const nlohmann::json map = body.value("map", nlohmann::json::object());
      for (const auto& [k, v] : map.items())
        t.map.emplace(k, v.get<std::string>());
      for (const auto& v : body.at("ipa_vowels")) t.ipa_vowels.insert(v.get<std::string>());
      for (const auto& [k, v] : t.map)
        if (!t.ipa_vowels.contains(v))
          throw ValidationError("phone map: '" + k + "' maps to '" + v +
                                "' which is not in the " + lang + " vowel inventory");
      pm.tables_.emplace(lang, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("phone map: ") + e.what());
  }
  if (!pm.tables_.contains("other")) throw ValidationError("phone map: missing \"other\" language");
  return pm;
}

PhoneMap PhoneMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open phone map " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

const PhoneMap& PhoneMap::builtin() {
  static const PhoneMap pm = from_json(nlohmann::json::parse(embedded::kPhoneMapJson));
  return pm;
}

const PhoneMap::LanguageTable& PhoneMap::table(const Language& lang) const {
  if (auto it = tables_.find(lang.tag()); it != tables_.end()) return it->second;
  return tables_.find("other")->second;
}

const std::set<std::string, std::less<>>& PhoneMap::inventory(const Language& lang) const {
  return table(lang).ipa_vowels;
}

std::optional<std::string> PhoneMap::to_ipa(std::string_view phone_label,
                                            const Language& lang) const {
  const LanguageTable& t = table(lang);
  if (t.ipa_vowels.contains(phone_label)) return std::string(phone_label);
  std::string_view key = t.strip_stress_digits ? strip_stress(phone_label) : phone_label;
  if (auto it = t.map.find(key); it != t.map.end()) return it->second;
  return std::nullopt;
}

}  // namespace vowelprompt
