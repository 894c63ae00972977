#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vowelprompt {

/// Rows are gold labels, columns predicted labels plus a trailing "invalid"
/// column for predictions outside the label set.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::int64_t>> counts;  // labels.size() x (labels.size() + 1)
  std::int64_t total = 0;

  std::int64_t invalid(std::size_t gold_row) const { return counts[gold_row].back(); }
};

inline constexpr const char* kInvalidColumn = "invalid";

struct ClassScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct EvalResult {
  double uacc = 0.0;  // macro recall over classes with support
  double wf1 = 0.0;   // support-weighted F1
  std::map<std::string, ClassScore> per_class;
  std::int64_t n = 0;
};

/// Tallies gold/pred pairs. Throws ValidationError on length mismatch, an
/// empty or duplicated label list, or a gold label outside `labels`.
ConfusionMatrix confusion(std::span<const std::string> golds, std::span<const std::string> preds,
                          std::span<const std::string> labels);

/// Per-class P/R/F1 (0 for 0/0), unweighted accuracy and weighted F1.
/// Throws ValidationError for an empty matrix.
EvalResult score(const ConfusionMatrix& cm);

nlohmann::ordered_json report_json(const ConfusionMatrix& cm, const EvalResult& r);

}  // namespace vowelprompt
