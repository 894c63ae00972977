#include "vowelprompt/evalkit.hpp"

#include <algorithm>
#include <set>

#include "vowelprompt/error.hpp"

namespace vowelprompt {

ConfusionMatrix confusion(std::span<const std::string> golds, std::span<const std::string> preds,
                          std::span<const std::string> labels) {
  if (golds.size() != preds.size())
    throw ValidationError("confusion: " + std::to_string(golds.size()) + " golds vs " +
                          std::to_string(preds.size()) + " predictions");
  if (labels.empty()) throw ValidationError("confusion: empty label list");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw ValidationError("confusion: duplicate labels");

  ConfusionMatrix cm;
  cm.labels.assign(labels.begin(), labels.end());
  cm.counts.assign(labels.size(), std::vector<std::int64_t>(labels.size() + 1, 0));
  auto index = [&](const std::string& l) -> std::size_t {
    return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), l) - labels.begin());
  };
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const std::size_t g = index(golds[i]);
    if (g == labels.size()) throw ValidationError("confusion: gold label \"" + golds[i] + "\" not in label set");
    cm.counts[g][index(preds[i])] += 1;  // unknown predictions land in the invalid column
  }
  cm.total = static_cast<std::int64_t>(golds.size());
  return cm;
}

EvalResult score(const ConfusionMatrix& cm) {
  if (cm.total <= 0) throw ValidationError("score: empty confusion matrix");
  const std::size_t k = cm.labels.size();
  EvalResult r;
  r.n = cm.total;
  double recall_sum = 0.0;
  int supported = 0;
  double weighted_f1 = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t support = 0;
    for (auto v : cm.counts[c]) support += v;
    std::int64_t predicted = 0;
    for (std::size_t g = 0; g < k; ++g) predicted += cm.counts[g][c];
    const auto tp = static_cast<double>(cm.counts[c][c]);

    ClassScore s;
    s.support = support;
    s.precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    s.recall = support > 0 ? tp / static_cast<double>(support) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    if (support > 0) {
      recall_sum += s.recall;
      ++supported;
    }
    weighted_f1 += static_cast<double>(support) * s.f1;
    r.per_class.emplace(cm.labels[c], s);
  }
  r.uacc = supported > 0 ? recall_sum / supported : 0.0;
  r.wf1 = weighted_f1 / static_cast<double>(cm.total);
  return r;
}

nlohmann::ordered_json report_json(const ConfusionMatrix& cm, const EvalResult& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["uacc"] = r.uacc;
  j["wf1"] = r.wf1;
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (const auto& label : cm.labels) {
    const ClassScore& s = r.per_class.at(label);
    per[label] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  j["per_class"] = std::move(per);
  std::vector<std::string> cols = cm.labels;
  cols.push_back(kInvalidColumn);
  j["confusion"] = {{"rows", cm.labels}, {"columns", cols}, {"counts", cm.counts}};
  return j;
}

}  // namespace vowelprompt
