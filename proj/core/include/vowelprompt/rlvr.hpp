#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vowelprompt {

/// Model output split into its reasoning and answer blocks.
struct ParsedOutput {
  std::optional<std::string> think;
  std::optional<std::string> answer;
  /// Exactly one <think>...</think> followed by exactly one
  /// <answer>...</answer>, with only whitespace around and between them.
  bool well_formed = false;

  bool operator==(const ParsedOutput&) const = default;
};

/// Total: never throws. The answer is the trimmed text of the first closed
/// <answer> block, even when the output is otherwise malformed.
ParsedOutput parse_output(std::string_view output);

struct RewardResult {
  int r_acc = 0;
  int r_format = 0;
  int total = 0;

  bool operator==(const RewardResult&) const = default;
};

struct RewardOptions {
  /// Compare answers byte-exactly after trimming instead of case-folding.
  bool strict_case = false;
};

/// R = R_acc + R_format. R_acc is 1 when the extracted answer matches the
/// gold label; R_format is 1 when the output is well formed. Throws
/// ValidationError when `gold` is not in `label_set`.
RewardResult reward(std::string_view output, std::string_view gold,
                    std::span<const std::string> label_set, const RewardOptions& opts = {});

/// Group-relative advantages (r_i - mean) / std with population std; all
/// zeros when std < 1e-8. Throws ValidationError for fewer than two rewards.
std::vector<double> group_advantages(std::span<const double> rewards);

}  // namespace vowelprompt
