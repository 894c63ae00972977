#include <doctest.h>

#include <nlohmann/json.hpp>

#include "synth.hpp"
#include "vowelprompt/config.hpp"
#include "vowelprompt/error.hpp"

using namespace vowelprompt;
using nlohmann::json;

TEST_SUITE("config") {
  TEST_CASE("empty document gives the defaults") {
    const PipelineConfig c = config_from_json(json::object());
    CHECK(c.k == 5);
    CHECK(c.min_group_count == 10);
    CHECK(c.pitch.hop_s == 0.01);
    CHECK(c.pitch.voicing_threshold == 0.45);
    CHECK(c.pitch.floor_hz == 60.0);
    CHECK(c.pitch.ceiling_hz == 600.0);
    CHECK(c.intensity.window_s == 0.04);
    CHECK(c.tiers.phones == "phones");
    CHECK(c.tiers.words == "words");
    CHECK(c.label_set == default_label_set());
    CHECK(c.template_id == PromptTemplateId::kZeroShotVowel);
    CHECK(c.shots == 3);
    CHECK_FALSE(c.lexicon_path);
    CHECK(c.gateway.api_key.empty());
  }

  TEST_CASE("the shipped example parses and matches the defaults") {
    const auto path = std::filesystem::path(VP_FIXTURE_DIR) / ".." / ".." / "core" / "data" / "config.example.json";
    const PipelineConfig c = load_config(path);
    const PipelineConfig d;
    CHECK(c.k == d.k);
    CHECK(c.pitch.voicing_threshold == d.pitch.voicing_threshold);
    CHECK(c.pitch.octave_cost == d.pitch.octave_cost);
    CHECK(c.intensity.hop_s == d.intensity.hop_s);
    CHECK(c.label_set == d.label_set);
    CHECK(c.gateway.model_name == "my-model");
    CHECK(c.gateway.max_concurrency == 4);
  }

  TEST_CASE("overrides") {
    const auto c = config_from_json(json::parse(R"({
      "k": 7, "template": "few_shot_vowel", "shots": 2, "label_set": ["pos", "neg"],
      "pitch": {"voicing_threshold": 0.5}, "tiers": {"phones": "phone"},
      "gateway": {"model": "m", "max_retries": 0, "temperature": 0.2}})"));
    CHECK(c.k == 7);
    CHECK(c.template_id == PromptTemplateId::kFewShotVowel);
    CHECK(c.shots == 2);
    CHECK(c.label_set == std::vector<std::string>{"pos", "neg"});
    CHECK(c.pitch.voicing_threshold == 0.5);
    CHECK(c.pitch.hop_s == 0.01);
    CHECK(c.tiers.phones == "phone");
    CHECK(c.tiers.words == "words");
    CHECK(c.gateway.model_name == "m");
    CHECK(c.gateway.max_retries == 0);
    CHECK(c.gateway.temperature == 0.2);
  }

  TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"kk": 5})")), doctest::Contains("\"kk\""), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"pitch": {"hop": 0.01}})")),
                         doctest::Contains("pitch.hop"), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"gateway": {"api_key": "sk"}})")),
                         doctest::Contains("gateway.api_key"), ValidationError);
  }

  TEST_CASE("types and ranges") {
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"k": 5.5})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"k": "5"})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"k": 10})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"k": 1})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"pitch": 3})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"pitch": {"voicing_threshold": 1.5}})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"label_set": []})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse(R"({"label_set": ["a", "a"]})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(json::parse("[]")), ValidationError);
  }

  TEST_CASE("unknown template lists the valid ids") {
    CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"template": "one_shot"})")),
                         doctest::Contains("zero_shot_transcript, zero_shot_vowel, few_shot_vowel"), ValidationError);
  }

  TEST_CASE("relative paths resolve against the config's directory") {
    vptest::TempDir dir;
    std::filesystem::create_directories(dir / "cfg");
    vptest::spit(dir / "cfg" / "c.json", R"({"lexicon_path": "lex.json", "phone_map_path": "/abs/map.json"})");
    const PipelineConfig c = load_config(dir / "cfg" / "c.json");
    REQUIRE(c.lexicon_path);
    CHECK(*c.lexicon_path == dir.path() / "cfg" / "lex.json");
    CHECK(*c.phone_map_path == "/abs/map.json");
  }

  TEST_CASE("load errors") {
    vptest::TempDir dir;
    CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
    vptest::spit(dir / "bad.json", "{ not json");
    CHECK_THROWS_WITH_AS(load_config(dir / "bad.json"), doctest::Contains("bad.json"), ValidationError);
  }
}
