#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vowelprompt/config.hpp"
#include "vowelprompt/corpus.hpp"
#include "vowelprompt/lld.hpp"
#include "vowelprompt/phone_map.hpp"

namespace vowelprompt::cli {

struct ExtractOptions {
  int jobs = 1;
  /// JSONL of per-frame (id, time, f0, intensity_db) for debugging.
  std::optional<std::filesystem::path> dump_contours;
};

/// Manifest to per-utterance LLDs. Pitch bounds are fitted per speaker over
/// all of that speaker's audio; output order is manifest order for any
/// `jobs`. Diagnostics (e.g. a missing words tier) go to `log`.
std::vector<UtteranceLLDs> extract_corpus(std::span<const UtteranceEntry> entries,
                                          const PipelineConfig& cfg, const PhoneMap& phones,
                                          const ExtractOptions& opts, std::ostream& log);

/// Flattens utterance rows into the vowel list `fit` consumes.
std::vector<VowelLLD> flatten(std::span<const UtteranceLLDs> rows);

/// Label from a model output: the answer block if there is one, otherwise the
/// first word with surrounding punctuation removed. Matched to `labels`
/// case-insensitively; returned verbatim (and so counted invalid) otherwise.
std::string prediction_label(std::string_view output, std::span<const std::string> labels);

}  // namespace vowelprompt::cli
