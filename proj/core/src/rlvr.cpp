#include "vowelprompt/rlvr.hpp"

#include <algorithm>

#include "text_util.hpp"
#include "vowelprompt/error.hpp"
#include "vowelprompt/stats.hpp"

namespace vowelprompt {
namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

std::size_t count_of(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + needle.size()))
    ++n;
  return n;
}

bool blank(std::string_view s) { return detail::trim(s).empty(); }

// Inner text of the first open...close pair, if the pair is closed.
std::optional<std::string_view> first_block(std::string_view s, std::string_view open,
                                            std::string_view close) {
  const std::size_t a = s.find(open);
  if (a == std::string_view::npos) return std::nullopt;
  const std::size_t body = a + open.size();
  const std::size_t b = s.find(close, body);
  if (b == std::string_view::npos) return std::nullopt;
  return s.substr(body, b - body);
}

}  // namespace

ParsedOutput parse_output(std::string_view o) {
  ParsedOutput out;
  if (auto a = first_block(o, kAnswerOpen, kAnswerClose)) out.answer = std::string(detail::trim(*a));
  if (auto t = first_block(o, kThinkOpen, kThinkClose)) out.think = std::string(*t);

  if (count_of(o, kThinkOpen) != 1 || count_of(o, kThinkClose) != 1 ||
      count_of(o, kAnswerOpen) != 1 || count_of(o, kAnswerClose) != 1)
    return out;
  const std::size_t t_open = o.find(kThinkOpen);
  const std::size_t t_close = o.find(kThinkClose);
  const std::size_t a_open = o.find(kAnswerOpen);
  const std::size_t a_close = o.find(kAnswerClose);
  if (!(t_open < t_close && t_close < a_open && a_open < a_close)) return out;
  if (!blank(o.substr(0, t_open))) return out;
  if (!blank(o.substr(t_close + kThinkClose.size(), a_open - t_close - kThinkClose.size()))) return out;
  if (!blank(o.substr(a_close + kAnswerClose.size()))) return out;
  out.well_formed = true;
  return out;
}

RewardResult reward(std::string_view output, std::string_view gold,
                    std::span<const std::string> label_set, const RewardOptions& opts) {
  auto norm = [&](std::string_view s) {
    return opts.strict_case ? std::string(detail::trim(s)) : detail::to_lower_ascii(detail::trim(s));
  };
  const std::string y = norm(gold);
  const bool known = std::any_of(label_set.begin(), label_set.end(),
                                 [&](const std::string& l) { return norm(l) == y; });
  if (!known) throw ValidationError("gold label \"" + std::string(gold) + "\" is not in the label set");

  const ParsedOutput p = parse_output(output);
  RewardResult r;
  r.r_format = p.well_formed ? 1 : 0;
  r.r_acc = p.answer && norm(*p.answer) == y ? 1 : 0;
  r.total = r.r_acc + r.r_format;
  return r;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw ValidationError("group_advantages needs at least two rewards");
  const MomentStats m = moments(rewards);
  std::vector<double> out(rewards.size(), 0.0);
  if (m.std < 1e-8) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - m.mean) / m.std;
  return out;
}

}  // namespace vowelprompt
