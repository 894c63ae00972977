#include <doctest.h>

#include <nlohmann/json.hpp>

#include "synth.hpp"
#include "vowelprompt/error.hpp"
#include "vowelprompt/phone_map.hpp"

using namespace vowelprompt;

TEST_SUITE("phone_map") {
  const Language en = Language::parse("en");

  TEST_CASE("ARPAbet with stress digits") {
    const PhoneMap& pm = PhoneMap::builtin();
    CHECK(pm.to_ipa("AA1", en) == "\xC9\x91");  // ɑ
    CHECK(pm.to_ipa("AA0", en) == "\xC9\x91");
    CHECK(pm.to_ipa("AE2", en) == "\xC3\xA6");  // æ
    CHECK(pm.to_ipa("AH0", en) == "\xCA\x8C");  // ʌ
    CHECK(pm.to_ipa("IY1", en) == "i");
    CHECK(pm.to_ipa("AY1", en) == "a\xC9\xAA");  // aɪ
  }

  TEST_CASE("consonants and unknown labels are absent") {
    const PhoneMap& pm = PhoneMap::builtin();
    for (const char* c : {"T", "DH", "K", "HH", "sil", "spn", "xyz", "1"}) {
      CAPTURE(c);
      CHECK_FALSE(pm.to_ipa(c, en).has_value());
    }
  }

  TEST_CASE("IPA-native labels, including diphthongs") {
    const PhoneMap& pm = PhoneMap::builtin();
    CHECK(pm.to_ipa("a\xC9\xAA", en) == "a\xC9\xAA");
    CHECK(pm.to_ipa("\xC9\x9B", Language::parse("fr")) == "\xC9\x9B");
    CHECK(pm.to_ipa("a\xC9\xAA", Language::parse("de")) == "a\xC9\xAA");
    CHECK_FALSE(pm.to_ipa("t", Language::parse("fr")).has_value());
  }

  TEST_CASE("every mapped value is in its language inventory") {
    const PhoneMap& pm = PhoneMap::builtin();
    const auto doc = nlohmann::json::parse(vptest::slurp(std::filesystem::path(VP_FIXTURE_DIR) / ".." / ".." /
                                                         "core" / "data" / "phone_map.json"));
    for (const auto& [tag, table] : doc.at("languages").items()) {
      const Language lang = Language::parse(tag);
      for (const auto& [label, ipa] : table.at("map").items()) {
        CAPTURE(label);
        CHECK(pm.inventory(lang).contains(ipa.get<std::string>()));
        CHECK(pm.to_ipa(label, lang) == ipa.get<std::string>());
      }
    }
  }

  TEST_CASE("unknown languages use the fallback table") {
    const Language es = Language::parse("es");
    CHECK(es.code() == Language::Code::kOther);
    CHECK(es.tag() == "es");
    CHECK(PhoneMap::builtin().to_ipa("a", es) == "a");
  }

  TEST_CASE("strip_stress") {
    CHECK(strip_stress("AA1") == "AA");
    CHECK(strip_stress("ER0") == "ER");
    CHECK(strip_stress("T") == "T");
    CHECK(strip_stress("3") == "3");
  }

  TEST_CASE("from_json rejects values outside the inventory") {
    const auto bad = nlohmann::json::parse(R"({"schema_version":1,"languages":{"en":{"strip_stress_digits":true,
      "map":{"AA":"q"},"ipa_vowels":["a"]},"other":{"strip_stress_digits":false,"map":{},"ipa_vowels":["a"]}}})");
    CHECK_THROWS_AS(PhoneMap::from_json(bad), ValidationError);
  }
}
