#include "vowelprompt/prompt.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vowelprompt/error.hpp"
#include "vowelprompt/jsonl.hpp"

namespace vowelprompt {
namespace {

constexpr std::array<std::string_view, kNumTemplates> kTemplateNames = {
    "zero_shot_transcript", "zero_shot_vowel", "few_shot_vowel", "sft_with_reasoning",
    "sft_without_reasoning"};

constexpr std::string_view kPreamble = "Now you are an expert in sentiment and emotional analysis.";
constexpr std::string_view kConversationIntro =
    "The following conversation noted between '### ###' involves several speakers.";
constexpr std::string_view kVowelHeader = "Vowel-level Speech Descriptions of ";
constexpr std::string_view kThinkInstruction =
    "Output the thinking process in <think> </think> and emotion label prediction in <answer> "
    "</answer> tags.";
constexpr std::string_view kAnswerInstruction =
    "Output the emotion label prediction in <answer> </answer> tags.";

struct Conversation {
  std::string text;        // intro line plus the ### ... ### block
  std::string target_ref;  // "Speaker_i:<transcript>"
};

Conversation render_conversation(const UtteranceEntry& e) {
  std::map<std::string, int> ids;
  auto speaker = [&](const std::string& who) {
    auto [it, inserted] = ids.emplace(who, static_cast<int>(ids.size()));
    return "Speaker_" + std::to_string(it->second) + ":";
  };
  std::vector<std::string> lines;
  for (const auto& turn : e.context) lines.push_back(speaker(turn.speaker) + turn.text);
  Conversation c;
  c.target_ref = speaker(e.speaker_id) + e.transcript;
  lines.push_back(c.target_ref);

  c.text = std::string(kConversationIntro) + "\n### ";
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) c.text += "\n";
    c.text += lines[i];
  }
  c.text += " ###";
  return c;
}

std::string join_labels(std::span<const std::string> labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0) out += ", ";
    out += labels[i];
  }
  return out;
}

std::string vowel_section(const std::string& target_ref, std::string_view block) {
  return std::string(kVowelHeader) + target_ref + ":\n" + std::string(block);
}

}  // namespace

std::string_view template_name(PromptTemplateId id) {
  return kTemplateNames[static_cast<std::size_t>(id)];
}

std::optional<PromptTemplateId> template_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumTemplates; ++i)
    if (kTemplateNames[i] == name) return static_cast<PromptTemplateId>(i);
  return std::nullopt;
}

std::string template_names_joined() {
  std::string out;
  for (std::size_t i = 0; i < kNumTemplates; ++i) {
    if (i > 0) out += ", ";
    out += kTemplateNames[i];
  }
  return out;
}

bool uses_vowel_block(PromptTemplateId id) { return id != PromptTemplateId::kZeroShotTranscript; }

std::vector<std::string> default_label_set() {
  return {"angry", "happy", "sad", "neutral", "excited"};
}

RenderedExemplar render_exemplar(const UtteranceEntry& entry, std::string_view vowel_block) {
  if (!entry.label) throw ValidationError(entry.utterance_id + ": few-shot exemplar has no label");
  if (entry.transcript.empty())
    throw ValidationError(entry.utterance_id + ": few-shot exemplar has no transcript");
  const Conversation c = render_conversation(entry);
  RenderedExemplar ex;
  ex.utterance_id = entry.utterance_id;
  ex.text = c.text + "\n" + vowel_section(c.target_ref, vowel_block) +
            "\nEmotional label of " + c.target_ref + ": " + *entry.label;
  return ex;
}

PromptRecord build_prompt(const UtteranceEntry& entry, std::string_view vowel_block,
                          PromptTemplateId template_id, std::span<const std::string> label_set,
                          std::span<const RenderedExemplar> exemplars) {
  if (entry.transcript.empty())
    throw ValidationError(entry.utterance_id + ": missing transcript");
  if (label_set.empty()) throw ValidationError("label set is empty");
  if (entry.label &&
      std::find(label_set.begin(), label_set.end(), *entry.label) == label_set.end())
    throw ValidationError(entry.utterance_id + ": label \"" + *entry.label +
                          "\" is not in the label set");
  const bool few_shot = template_id == PromptTemplateId::kFewShotVowel;
  if (few_shot && exemplars.empty())
    throw ValidationError(entry.utterance_id + ": few-shot prompt needs at least one exemplar");
  if (!few_shot && !exemplars.empty())
    throw ValidationError(entry.utterance_id + ": exemplars are only valid for few_shot_vowel");

  const Conversation c = render_conversation(entry);
  const std::string labels = join_labels(label_set);
  const std::string select_context =
      "Please select the emotional label of " + c.target_ref + " based on the context";
  const std::string output_one =
      "Please output ONLY ONE label from " + labels + " as the first word, and then explain your choice.";

  std::string p(kPreamble);
  p += "\n";
  if (few_shot) {
    p += "\n";
    for (const auto& ex : exemplars) p += ex.text + "\n\n";
  }
  p += c.text + "\n";
  if (template_id == PromptTemplateId::kZeroShotTranscript) {
    p += select_context + ".\n" + output_one;
  } else {
    p += vowel_section(c.target_ref, vowel_block) + "\n";
    p += select_context + " and the vowel-level acoustic features.\n";
    switch (template_id) {
      case PromptTemplateId::kSftWithReasoning: p += kThinkInstruction; break;
      case PromptTemplateId::kSftWithoutReasoning: p += kAnswerInstruction; break;
      default: p += output_one; break;
    }
  }

  PromptRecord r;
  r.utterance_id = entry.utterance_id;
  r.template_id = template_id;
  r.prompt_text = std::move(p);
  r.label = entry.label;
  r.label_set.assign(label_set.begin(), label_set.end());
  for (const auto& ex : exemplars) r.exemplar_ids.push_back(ex.utterance_id);
  return r;
}

std::size_t emit_dataset(std::span<const PromptRecord> records, const std::filesystem::path& out) {
  std::ostringstream os;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.utterance_id;
    j["template"] = std::string(template_name(r.template_id));
    j["prompt"] = r.prompt_text;
    j["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
    j["label_set"] = r.label_set;
    if (!r.exemplar_ids.empty()) j["exemplar_ids"] = r.exemplar_ids;
    os << j.dump() << '\n';
  }
  write_file_atomic(out, os.str());
  return records.size();
}

std::vector<PromptRecord> read_dataset(const std::filesystem::path& path) {
  std::vector<PromptRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j, std::size_t) {
    PromptRecord r;
    r.utterance_id = j.at("id").get<std::string>();
    const auto name = j.at("template").get<std::string>();
    auto t = template_from_name(name);
    if (!t) throw ValidationError("unknown template \"" + name + "\"");
    r.template_id = *t;
    r.prompt_text = j.at("prompt").get<std::string>();
    if (r.prompt_text.empty()) throw ValidationError("empty prompt");
    if (const auto& l = j.at("label"); !l.is_null()) r.label = l.get<std::string>();
    r.label_set = j.at("label_set").get<std::vector<std::string>>();
    if (auto it = j.find("exemplar_ids"); it != j.end())
      r.exemplar_ids = it->get<std::vector<std::string>>();
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace vowelprompt
