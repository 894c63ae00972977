#include <doctest.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "cli_harness.hpp"
#include "lld_factory.hpp"
#include "stub_server.hpp"
#include "synth.hpp"
#include "vowelprompt/gateway.hpp"
#include "vowelprompt/lld.hpp"
#include "vowelprompt/norm_quant.hpp"
#include "vowelprompt/prompt.hpp"
#include "vowelprompt/verbalizer.hpp"

using namespace vowelprompt;
using vptest::run_cli;
using nlohmann::json;

namespace {

std::vector<json> jsonl(const std::filesystem::path& p) {
  std::vector<json> out;
  std::istringstream in(vptest::slurp(p));
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

// Five one-vowel utterances from one speaker whose features all rise with
// the utterance index, so every feature of utterance i lands in bin i.
void write_ranked_corpus(const vptest::TempDir& dir) {
  std::vector<UtteranceLLDs> rows;
  std::string manifest;
  for (int i = 0; i < 5; ++i) {
    UtteranceLLDs row;
    row.utterance_id = "r" + std::to_string(i);
    row.speaker_id = "S";
    row.pitch_bounds = {75.0, 600.0};
    const double x = 1.0 + i;
    VowelLLD v = vptest::make_lld("S", "\xC3\xA6", 100 * x, 10 * x, 2 * x, -30 + x, x, 0.05 * x);
    v.segment.utterance_id = row.utterance_id;
    v.segment.word = "cat";
    v.segment.start = 0.10;
    v.segment.end = 0.10 + 0.05 * x;
    row.vowels.push_back(v);
    rows.push_back(row);
    manifest += json{{"utterance_id", row.utterance_id}, {"speaker_id", "S"}, {"audio_path", "a.wav"},
                     {"alignment_path", "a.TextGrid"}, {"transcript", "The cat."}, {"label", "sad"}}
                    .dump() +
                "\n";
  }
  write_lld_file(dir / "lld.jsonl", rows);
  vptest::spit(dir / "manifest.jsonl", manifest);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help and usage errors") {
    auto r = run_cli({"--help"});
    CHECK(r.code == 0);
    for (const char* sub : {"extract", "fit", "render", "verify", "score", "infer"})
      CHECK(r.out.find(sub) != std::string::npos);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"bogus"}).code == 1);
    CHECK(run_cli({"extract", "--manifest", "m.jsonl"}).code == 1);  // --out missing
    CHECK(run_cli({"fit", "--manifest", "a", "--lld", "b", "--out", "c"}).code == 1);
    CHECK(run_cli({"fit", "--lld", "b", "--out", "c", "--k", "12"}).code == 1);
  }

  TEST_CASE("every subcommand documents its flags") {
    const std::vector<std::pair<std::string, std::vector<std::string>>> expected = {
        {"extract", {"--config", "--manifest", "--out", "--jobs", "--dump-contours", "--phones-tier", "--words-tier"}},
        {"fit", {"--config", "--manifest", "--lld", "--out", "--k", "--min-group-count", "--jobs"}},
        {"render", {"--config", "--stats", "--lld", "--manifest", "--template", "--out", "--labels", "--shots",
                    "--exemplar-pool"}},
        {"verify", {"--pred", "--gold", "--out", "--strict-case"}},
        {"score", {"--pred", "--gold", "--labels", "--out"}},
        {"infer", {"--config", "--prompts", "--out", "--base-url", "--model", "--concurrency", "--temperature",
                   "--timeout", "--max-retries", "--retry-errors"}},
    };
    for (const auto& [sub, flags] : expected) {
      const auto r = run_cli({sub, "--help"});
      CAPTURE(sub);
      CHECK(r.code == 0);
      for (const auto& f : flags) {
        CAPTURE(f);
        CHECK(r.out.find(f) != std::string::npos);
      }
    }
  }

  TEST_CASE("extract, fit, render on a synthetic corpus") {
    vptest::TempDir dir;
    const auto manifest = vptest::write_synthetic_corpus(dir.path(), 3);
    auto r = run_cli({"extract", "--manifest", manifest.string(), "--out", (dir / "lld.jsonl").string(), "--jobs", "2",
                      "--dump-contours", (dir / "contours.jsonl").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto lines = jsonl(dir / "lld.jsonl");
    REQUIRE(lines.size() == 3);
    for (int u = 0; u < 3; ++u) {
      CHECK(lines[u]["utterance_id"] == "utt" + std::to_string(u));
      REQUIRE(lines[u]["vowels"].size() == 2);
      CHECK(lines[u]["vowels"][0]["ipa"] == "\xC3\xA6");
      CHECK(lines[u]["vowels"][0]["word"] == "hat");
      CHECK(lines[u]["vowels"][1]["ipa"] == "i");
      CHECK(lines[u]["vowels"][1]["pitch_available"] == true);
    }
    const auto contours = jsonl(dir / "contours.jsonl");
    CHECK(contours.size() == 3 * 120);

    r = run_cli({"fit", "--lld", (dir / "lld.jsonl").string(), "--out", (dir / "stats.json").string(), "--k", "3",
                 "--min-group-count", "1"});
    REQUIRE(r.code == 0);
    const NormQuantModel m = load_model(dir / "stats.json");
    CHECK(m.k == 3);
    CHECK(m.fit_vowel_count == 6);

    // Fitting straight from the manifest gives the same model.
    r = run_cli({"fit", "--manifest", manifest.string(), "--out", (dir / "stats2.json").string(), "--k", "3",
                 "--min-group-count", "1"});
    REQUIRE(r.code == 0);
    CHECK(load_model(dir / "stats2.json") == m);

    r = run_cli({"render", "--stats", (dir / "stats.json").string(), "--lld", (dir / "lld.jsonl").string(),
                 "--manifest", manifest.string(), "--template", "few_shot_vowel", "--shots", "2", "--out",
                 (dir / "prompts.jsonl").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto prompts = jsonl(dir / "prompts.jsonl");
    REQUIRE(prompts.size() == 3);
    CHECK(prompts[0]["exemplar_ids"] == json::array({"utt1", "utt2"}));
    CHECK(prompts[1]["exemplar_ids"] == json::array({"utt0", "utt2"}));
    CHECK(prompts[2]["label"] == "sad");

    r = run_cli({"render", "--stats", (dir / "stats.json").string(), "--lld", (dir / "lld.jsonl").string(),
                 "--manifest", manifest.string(), "--template", "few_shot_vowel", "--shots", "3", "--out",
                 (dir / "p3.jsonl").string()});
    CHECK(r.code == 1);
  }

  TEST_CASE("render output for a corpus with known bins") {
    vptest::TempDir dir;
    write_ranked_corpus(dir);
    auto r = run_cli({"fit", "--lld", (dir / "lld.jsonl").string(), "--out", (dir / "stats.json").string()});
    REQUIRE(r.code == 0);
    r = run_cli({"render", "--stats", (dir / "stats.json").string(), "--lld", (dir / "lld.jsonl").string(),
                 "--manifest", (dir / "manifest.jsonl").string(), "--out", (dir / "p.jsonl").string()});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto recs = read_dataset(dir / "p.jsonl");
    REQUIRE(recs.size() == 5);

    const char* level[] = {"very low", "low", "moderate", "high", "very high"};
    const char* slope[] = {"falling sharply", "falling", "level", "rising", "rising sharply"};
    const char* var[] = {"very steady", "steady", "moderate", "variable", "highly variable"};
    const char* dur[] = {"very short", "short", "moderate", "lengthened", "greatly lengthened"};
    for (int i = 0; i < 5; ++i) {
      char times[32];
      std::snprintf(times, sizeof times, "0.10\xE2\x80\x93%.2fs", 0.10 + 0.05 * (i + 1));
      const std::string line = std::string("word \"cat\" vowel /\xC3\xA6/ (") + times + "): pitch " + level[i] + ", " +
                               slope[i] + ", pitch variation " + var[i] + ", intensity " + level[i] + ", intensity " +
                               var[i] + ", duration " + dur[i];
      UtteranceEntry e;
      e.utterance_id = "r" + std::to_string(i);
      e.speaker_id = "S";
      e.transcript = "The cat.";
      e.label = "sad";
      CAPTURE(i);
      CHECK(recs[i].prompt_text ==
            build_prompt(e, line, PromptTemplateId::kZeroShotVowel, default_label_set()).prompt_text);
      CHECK(recs[i].label == "sad");
    }
  }

  TEST_CASE("render rejects an unknown template and missing files") {
    vptest::TempDir dir;
    write_ranked_corpus(dir);
    REQUIRE(run_cli({"fit", "--lld", (dir / "lld.jsonl").string(), "--out", (dir / "stats.json").string()}).code == 0);
    auto r = run_cli({"render", "--stats", (dir / "stats.json").string(), "--lld", (dir / "lld.jsonl").string(),
                      "--manifest", (dir / "manifest.jsonl").string(), "--template", "two_shot", "--out",
                      (dir / "p.jsonl").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find(template_names_joined()) != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "p.jsonl"));

    r = run_cli({"render", "--stats", (dir / "nope.json").string(), "--lld", (dir / "lld.jsonl").string(),
                 "--manifest", (dir / "manifest.jsonl").string(), "--out", (dir / "p.jsonl").string()});
    CHECK(r.code == 2);
    r = run_cli({"extract", "--manifest", (dir / "none.jsonl").string(), "--out", (dir / "x.jsonl").string()});
    CHECK(r.code == 2);
    vptest::spit(dir / "bad.json", "{\"k\": 5, \"extra\": 1}");
    r = run_cli({"fit", "-c", (dir / "bad.json").string(), "--lld", (dir / "lld.jsonl").string(), "--out",
                 (dir / "s.json").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("extra") != std::string::npos);
  }

  TEST_CASE("verify and score") {
    vptest::TempDir dir;
    std::vector<PromptRecord> golds;
    const std::vector<std::string> labels = default_label_set();
    for (const auto& [id, label] : std::vector<std::pair<std::string, std::string>>{
             {"a", "angry"}, {"b", "angry"}, {"c", "sad"}, {"d", "happy"}}) {
      UtteranceEntry e;
      e.utterance_id = id;
      e.speaker_id = "S";
      e.transcript = "x";
      e.label = label;
      golds.push_back(build_prompt(e, "", PromptTemplateId::kZeroShotTranscript, labels));
    }
    emit_dataset(golds, dir / "gold.jsonl");
    std::string preds;
    preds += to_json(InferenceRecord{"a", "p", "<think>t</think><answer>angry</answer>", std::nullopt, 200, 0, 1}).dump() + "\n";
    preds += to_json(InferenceRecord{"b", "p", "Sad.", std::nullopt, 200, 0, 1}).dump() + "\n";
    preds += to_json(InferenceRecord{"c", "p", std::nullopt, "timeout", 0, 0, 4}).dump() + "\n";
    vptest::spit(dir / "pred.jsonl", preds);

    auto r = run_cli({"verify", "--pred", (dir / "pred.jsonl").string(), "--gold", (dir / "gold.jsonl").string()});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::vector<json> lines;
    for (std::string l; std::getline(in, l);) lines.push_back(json::parse(l));
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == json{{"id", "a"}, {"r_acc", 1}, {"r_format", 1}, {"total", 2}});
    CHECK(lines[1]["total"] == 0);
    CHECK(lines[4]["n"] == 4);
    CHECK(lines[4]["mean_total"] == doctest::Approx(0.5));

    r = run_cli({"score", "--pred", (dir / "pred.jsonl").string(), "--gold", (dir / "gold.jsonl").string(), "--out",
                 (dir / "report.json").string()});
    REQUIRE(r.code == 0);
    const json rep = json::parse(vptest::slurp(dir / "report.json"));
    CHECK(rep == json::parse(r.out));
    CHECK(rep["n"] == 4);
    // angry: 1 of 2 recalled (b predicted sad); sad: 0 of 1; happy: 0 of 1 (missing).
    CHECK(rep["uacc"].get<double>() == doctest::Approx(0.5 / 3.0));
    const auto& counts = rep["confusion"]["counts"];
    CHECK(counts[0][0] == 1);
    CHECK(counts[0][2] == 1);
    CHECK(counts[2][5] == 1);

    vptest::spit(dir / "stray.jsonl", to_json(InferenceRecord{"zz", "p", "x", std::nullopt, 200, 0, 1}).dump() + "\n");
    CHECK(run_cli({"score", "--pred", (dir / "stray.jsonl").string(), "--gold", (dir / "gold.jsonl").string()}).code == 1);
  }

  TEST_CASE("infer against a local endpoint") {
    vptest::StubServer s([](const std::string&, int) { return vptest::StubReply{200, vptest::chat_body("<answer>sad</answer>")}; });
    vptest::TempDir dir;
    vptest::spit(dir / "p.jsonl", "{\"id\":\"a\",\"prompt\":\"x\"}\n{\"id\":\"b\",\"prompt\":\"y\"}\n");
    ::unsetenv(kApiKeyEnv);
    auto r = run_cli({"infer", "--prompts", (dir / "p.jsonl").string(), "--out", (dir / "o.jsonl").string(),
                      "--base-url", s.base_url(), "--model", "m"});
    CHECK(r.code == 1);
    CHECK(r.err.find(kApiKeyEnv) != std::string::npos);

    ::setenv(kApiKeyEnv, "sk-cli-secret", 1);
    r = run_cli({"infer", "--prompts", (dir / "p.jsonl").string(), "--out", (dir / "o.jsonl").string(), "--base-url",
                 s.base_url(), "--model", "m", "--concurrency", "2"});
    INFO(r.err);
    CHECK(r.code == 0);
    CHECK(json::parse(r.out) == json{{"n_ok", 2}, {"n_err", 0}, {"n_skipped", 0}});
    r = run_cli({"infer", "--prompts", (dir / "p.jsonl").string(), "--out", (dir / "o.jsonl").string(), "--base-url",
                 s.base_url(), "--model", "m"});
    CHECK(json::parse(r.out)["n_skipped"] == 2);
    CHECK(s.requests() == 2);
    CHECK(vptest::slurp(dir / "o.jsonl").find("sk-cli-secret") == std::string::npos);
    ::unsetenv(kApiKeyEnv);
  }
}
