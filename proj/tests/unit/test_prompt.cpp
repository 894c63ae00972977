#include <doctest.h>

#include "prompt_fixture.hpp"
#include "vowelprompt/error.hpp"
#include "vowelprompt/prompt.hpp"

using namespace vowelprompt;

namespace {

std::string golden(const std::string& name) { return vptest::slurp(vptest::kPromptDir / (name + ".txt")); }

std::string block() { return golden("vowel_block"); }

std::vector<RenderedExemplar> three_exemplars() {
  using vptest::exemplar_entry;
  return {
      render_exemplar(exemplar_entry("ex_a", "A", {}, "That's wonderful news!", "happy"),
                      "word \"news\" vowel /u/ (0.80\xE2\x80\x93" "1.02s): pitch very high, rising sharply, pitch "
                      "variation variable, intensity very high, intensity variable, duration greatly lengthened"),
      render_exemplar(exemplar_entry("ex_b", "B", {{"A", "Did you hear?"}}, "Yes. I can't believe he's gone.", "sad"),
                      "word \"gone\" vowel /\xC9\x94/ (1.10\xE2\x80\x93" "1.42s): pitch very low, falling, pitch "
                      "variation very steady, intensity low, intensity steady, duration lengthened"),
      render_exemplar(exemplar_entry("ex_c", "C", {}, "Get out of my office.", "angry"),
                      "word \"out\" vowel /a\xCA\x8A/ (0.21\xE2\x80\x93" "0.37s): pitch high, falling sharply, pitch "
                      "variation highly variable, intensity very high, intensity highly variable, duration short"),
  };
}

}  // namespace

TEST_SUITE("prompt") {
  const std::vector<std::string> labels = default_label_set();

  TEST_CASE("default label set") {
    CHECK(labels == std::vector<std::string>{"angry", "happy", "sad", "neutral", "excited"});
  }

  TEST_CASE("golden: every template") {
    for (PromptTemplateId id : {PromptTemplateId::kZeroShotTranscript, PromptTemplateId::kZeroShotVowel,
                                PromptTemplateId::kSftWithReasoning, PromptTemplateId::kSftWithoutReasoning}) {
      const std::string name(template_name(id));
      CAPTURE(name);
      const PromptRecord r = build_prompt(vptest::target_entry(), block(), id, labels);
      CHECK(r.prompt_text == golden(name));
      CHECK(r.exemplar_ids.empty());
    }
    const auto ex = three_exemplars();
    const PromptRecord r = build_prompt(vptest::target_entry(), block(), PromptTemplateId::kFewShotVowel, labels, ex);
    CHECK(r.prompt_text == golden("few_shot_vowel"));
    CHECK(r.exemplar_ids == std::vector<std::string>{"ex_a", "ex_b", "ex_c"});
  }

  TEST_CASE("transcript-only prompt differs only by the descriptions section") {
    const std::string with = build_prompt(vptest::target_entry(), block(), PromptTemplateId::kZeroShotVowel, labels).prompt_text;
    const std::string without =
        build_prompt(vptest::target_entry(), block(), PromptTemplateId::kZeroShotTranscript, labels).prompt_text;
    CHECK(with.find("Vowel-level Speech Descriptions") != std::string::npos);
    CHECK(without.find("Vowel-level Speech Descriptions") == std::string::npos);
    CHECK(without.find(block()) == std::string::npos);
  }

  TEST_CASE("anchors") {
    const std::string p = build_prompt(vptest::target_entry(), block(), PromptTemplateId::kSftWithReasoning, labels).prompt_text;
    CHECK(p.rfind("Now you are an expert in sentiment and emotional analysis.", 0) == 0);
    CHECK(p.find("The following conversation noted between '### ###'") != std::string::npos);
    CHECK(p.find("Output the thinking process in <think> </think>") != std::string::npos);
  }

  TEST_CASE("speakers are numbered by first appearance with the target last") {
    UtteranceEntry e = vptest::target_entry();
    e.context = {{"M", "one"}, {"F", "two"}, {"X", "three"}, {"M", "four"}};
    const std::string p = build_prompt(e, "", PromptTemplateId::kZeroShotTranscript, labels).prompt_text;
    CHECK(p.find("### Speaker_0:one\nSpeaker_1:two\nSpeaker_2:three\nSpeaker_0:four\nSpeaker_1:I told you, I was at work. ###") !=
          std::string::npos);
  }

  TEST_CASE("empty context") {
    UtteranceEntry e = vptest::target_entry();
    e.context.clear();
    const std::string p = build_prompt(e, "", PromptTemplateId::kZeroShotTranscript, labels).prompt_text;
    CHECK(p.find("### Speaker_0:I told you, I was at work. ###\n") != std::string::npos);
  }

  TEST_CASE("validation") {
    UtteranceEntry e = vptest::target_entry();
    e.transcript.clear();
    CHECK_THROWS_AS(build_prompt(e, block(), PromptTemplateId::kZeroShotVowel, labels), ValidationError);
    e = vptest::target_entry();
    e.label = "bored";
    CHECK_THROWS_AS(build_prompt(e, block(), PromptTemplateId::kZeroShotVowel, labels), ValidationError);
    CHECK_THROWS_AS(build_prompt(vptest::target_entry(), block(), PromptTemplateId::kFewShotVowel, labels),
                    ValidationError);
    const auto ex = three_exemplars();
    CHECK_THROWS_AS(build_prompt(vptest::target_entry(), block(), PromptTemplateId::kZeroShotVowel, labels, ex),
                    ValidationError);
    UtteranceEntry unlabeled = vptest::target_entry();
    unlabeled.label.reset();
    CHECK_THROWS_AS(render_exemplar(unlabeled, block()), ValidationError);
    CHECK_NOTHROW(build_prompt(unlabeled, block(), PromptTemplateId::kZeroShotVowel, labels));
  }

  TEST_CASE("template names") {
    for (std::size_t i = 0; i < kNumTemplates; ++i) {
      const auto id = static_cast<PromptTemplateId>(i);
      CHECK(template_from_name(template_name(id)) == id);
    }
    CHECK_FALSE(template_from_name("zero_shot").has_value());
    CHECK(template_names_joined() ==
          "zero_shot_transcript, zero_shot_vowel, few_shot_vowel, sft_with_reasoning, sft_without_reasoning");
  }

  TEST_CASE("emit and read back") {
    vptest::TempDir dir;
    std::vector<PromptRecord> recs;
    recs.push_back(build_prompt(vptest::target_entry(), block(), PromptTemplateId::kZeroShotVowel, labels));
    UtteranceEntry u = vptest::target_entry();
    u.utterance_id = "other";
    u.label.reset();
    recs.push_back(build_prompt(u, block(), PromptTemplateId::kZeroShotTranscript, labels));
    recs.push_back(build_prompt(vptest::target_entry(), block(), PromptTemplateId::kFewShotVowel, labels, three_exemplars()));
    CHECK(emit_dataset(recs, dir / "p.jsonl") == 3);
    CHECK(read_dataset(dir / "p.jsonl") == recs);

    const std::string text = vptest::slurp(dir / "p.jsonl");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.rfind("{\"id\":\"ses01_f_003\",\"template\":\"zero_shot_vowel\",\"prompt\":", 0) == 0);
    CHECK(text.find("\"exemplar_ids\":[\"ex_a\",\"ex_b\",\"ex_c\"]") != std::string::npos);

    CHECK(emit_dataset({}, dir / "empty.jsonl") == 0);
    CHECK(vptest::slurp(dir / "empty.jsonl").empty());
  }
}
