#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vowelprompt {

/// One labeled span of an interval tier. An empty label marks silence.
struct PhoneInterval {
  std::string label;
  double start = 0.0;
  double end = 0.0;

  bool operator==(const PhoneInterval&) const = default;
};

struct Tier {
  std::string name;
  std::vector<PhoneInterval> intervals;

  bool operator==(const Tier&) const = default;
};

/// Interval tiers of a Praat TextGrid, in file order. Point tiers are dropped.
struct AlignmentDoc {
  double start = 0.0;
  double total_duration = 0.0;
  std::vector<Tier> tiers;

  const Tier* find_tier(std::string_view name) const;

  bool operator==(const AlignmentDoc&) const = default;
};

/// Parses a long-format TextGrid. Input may be UTF-8 (optionally with BOM) or
/// UTF-16 LE/BE with a byte-order mark. Labels are trimmed, intervals sorted.
/// Throws ParseError carrying the offending line number.
AlignmentDoc parse_textgrid(std::string_view bytes);

AlignmentDoc load_textgrid(const std::filesystem::path& path);

/// Writes the long text format (UTF-8). Numbers use the shortest decimal form
/// that round-trips, so parse(serialize(doc)) == doc.
std::string serialize_textgrid(const AlignmentDoc& doc);

/// Throws StructuralError if any of the named tiers is missing.
void validate_alignment(const AlignmentDoc& doc, std::span<const std::string> required_tiers);

}  // namespace vowelprompt
