#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vowelprompt/corpus.hpp"

namespace vowelprompt {

enum class PromptTemplateId {
  kZeroShotTranscript,
  kZeroShotVowel,
  kFewShotVowel,
  kSftWithReasoning,
  kSftWithoutReasoning,
};

inline constexpr std::size_t kNumTemplates = 5;
inline constexpr std::size_t kDefaultShots = 3;

std::string_view template_name(PromptTemplateId id);
std::optional<PromptTemplateId> template_from_name(std::string_view name);
/// "zero_shot_transcript, zero_shot_vowel, ..." for error messages.
std::string template_names_joined();
bool uses_vowel_block(PromptTemplateId id);

/// IEMOCAP's four-plus-one class set.
std::vector<std::string> default_label_set();

struct PromptRecord {
  std::string utterance_id;
  PromptTemplateId template_id = PromptTemplateId::kZeroShotVowel;
  std::string prompt_text;
  std::optional<std::string> label;
  std::vector<std::string> label_set;
  std::vector<std::string> exemplar_ids;

  bool operator==(const PromptRecord&) const = default;
};

/// A labelled in-context example, already rendered to text.
struct RenderedExemplar {
  std::string utterance_id;
  std::string text;
};

/// Renders a labelled utterance as a few-shot example: its conversation, its
/// vowel descriptions, and the gold label.
RenderedExemplar render_exemplar(const UtteranceEntry& entry, std::string_view vowel_block);

/// Fills one of the prompt templates. Context turns become `Speaker_i:<text>`
/// lines (speakers numbered by first appearance, target last) between
/// `### ... ###`. Throws ValidationError for an empty transcript, a label
/// outside label_set, or exemplars supplied to (or missing from) the few-shot
/// template.
PromptRecord build_prompt(const UtteranceEntry& entry, std::string_view vowel_block,
                          PromptTemplateId template_id, std::span<const std::string> label_set,
                          std::span<const RenderedExemplar> exemplars = {});

/// Writes JSONL with fields id, template, prompt, label, label_set (and
/// exemplar_ids for few-shot records), in that order. Returns lines written.
std::size_t emit_dataset(std::span<const PromptRecord> records, const std::filesystem::path& out);

std::vector<PromptRecord> read_dataset(const std::filesystem::path& path);

}  // namespace vowelprompt
