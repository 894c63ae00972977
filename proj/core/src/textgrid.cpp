#include "vowelprompt/textgrid.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include "text_util.hpp"
#include "vowelprompt/error.hpp"

namespace vowelprompt {
namespace {

// Intervals may overshoot the grid's xmax by float noise in aligner output.
constexpr double kBoundsSlack = 1e-6;

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf16_to_utf8(std::string_view bytes, bool little_endian) {
  if (bytes.size() % 2 != 0) throw ParseError("odd byte count in UTF-16 input", 1);
  auto unit = [&](std::size_t i) -> std::uint32_t {
    const auto a = static_cast<unsigned char>(bytes[i]);
    const auto b = static_cast<unsigned char>(bytes[i + 1]);
    return little_endian ? (a | (b << 8)) : ((a << 8) | b);
  };
  std::string out;
  out.reserve(bytes.size() / 2);
  std::size_t line = 1;
  for (std::size_t i = 0; i < bytes.size(); i += 2) {
    std::uint32_t cp = unit(i);
    if (cp >= 0xD800 && cp <= 0xDBFF) {
      if (i + 3 >= bytes.size()) throw ParseError("truncated UTF-16 surrogate pair", line);
      const std::uint32_t lo = unit(i + 2);
      if (lo < 0xDC00 || lo > 0xDFFF) throw ParseError("invalid UTF-16 surrogate pair", line);
      cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
      i += 2;
    } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
      throw ParseError("unpaired UTF-16 low surrogate", line);
    }
    if (cp == '\n') ++line;
    append_utf8(out, cp);
  }
  return out;
}

std::string decode_text(std::string_view bytes) {
  auto starts = [&](std::initializer_list<unsigned char> bom) {
    if (bytes.size() < bom.size()) return false;
    return std::equal(bom.begin(), bom.end(), bytes.begin(),
                      [](unsigned char a, char b) { return a == static_cast<unsigned char>(b); });
  };
  if (starts({0xFF, 0xFE})) return utf16_to_utf8(bytes.substr(2), true);
  if (starts({0xFE, 0xFF})) return utf16_to_utf8(bytes.substr(2), false);
  if (starts({0xEF, 0xBB, 0xBF})) return std::string(bytes.substr(3));
  return std::string(bytes);
}

// One logical "key = value" entry. Quoted values may span physical lines.
struct Entry {
  std::string key;
  std::string raw;  // value text, unparsed
  bool quoted = false;
  std::string text;  // unescaped string when quoted
  std::size_t line = 0;
};

class EntryReader {
 public:
  explicit EntryReader(std::string text) : text_(std::move(text)) {}

  std::optional<Entry> next() {
    while (pos_ < text_.size()) {
      const std::size_t start_line = line_;
      std::string_view rest(text_);
      rest.remove_prefix(pos_);
      const std::size_t nl = rest.find('\n');
      std::string_view phys = nl == std::string_view::npos ? rest : rest.substr(0, nl);
      std::string_view body = detail::trim(phys);
      if (body.empty()) {
        advance_line(phys.size(), nl != std::string_view::npos);
        continue;
      }

      Entry e;
      e.line = start_line;
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) {
        e.key = std::string(body);
        advance_line(phys.size(), nl != std::string_view::npos);
        return e;
      }
      e.key = std::string(detail::trim(body.substr(0, eq)));
      std::string_view value = detail::trim(body.substr(eq + 1));
      if (value.empty() || value.front() != '"') {
        e.raw = std::string(value);
        advance_line(phys.size(), nl != std::string_view::npos);
        return e;
      }

      // Quoted string: scan from the opening quote across lines, "" escapes a quote.
      e.quoted = true;
      std::size_t i = pos_ + static_cast<std::size_t>(value.data() - rest.data()) + 1;
      std::string out;
      bool closed = false;
      while (i < text_.size()) {
        const char c = text_[i];
        if (c == '"') {
          if (i + 1 < text_.size() && text_[i + 1] == '"') {
            out.push_back('"');
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        if (c == '\n') ++line_;
        out.push_back(c);
        ++i;
      }
      if (!closed) throw ParseError("unterminated string", start_line);
      // Remainder of the closing line must be blank.
      std::size_t j = i;
      while (j < text_.size() && text_[j] != '\n') {
        if (!detail::is_space(text_[j]))
          throw ParseError("unexpected text after closing quote", line_);
        ++j;
      }
      if (j < text_.size()) {
        ++j;
        ++line_;
      }
      pos_ = j;
      e.text = std::move(out);
      return e;
    }
    return std::nullopt;
  }

  std::size_t line() const { return line_; }

 private:
  void advance_line(std::size_t len, bool had_newline) {
    pos_ += len + (had_newline ? 1 : 0);
    if (had_newline) ++line_;
  }

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string text) : reader_(std::move(text)) {}

  AlignmentDoc parse() {
    AlignmentDoc doc;
    expect_string("File type", "ooTextFile");
    expect_string("Object class", "TextGrid");
    doc.start = expect_number("xmin");
    doc.total_duration = expect_number("xmax");
    if (doc.start >= doc.total_duration) throw ParseError("TextGrid xmin >= xmax", last_line_);

    // "tiers? <exists>" has no '=', so the flag arrives as part of the key.
    const Entry tiers = take_any();
    const std::string flag = tiers.key.rfind("tiers?", 0) == 0 ? std::string(detail::trim(tiers.key.substr(6))) : "";
    if (flag == "<absent>") return doc;
    if (flag != "<exists>") throw ParseError("malformed header: expected tiers? <exists>", tiers.line);
    const long n_items = expect_count("size");
    take_exact("item []:");

    for (long i = 1; i <= n_items; ++i) {
      take_exact("item [" + std::to_string(i) + "]:");
      const std::string cls = expect_any_string("class");
      const std::string name = expect_any_string("name");
      const double tier_start = expect_number("xmin");
      const double tier_end = expect_number("xmax");
      if (cls == "IntervalTier") {
        Tier tier{name, {}};
        const long n = expect_count("intervals: size");
        std::vector<std::size_t> lines;
        for (long j = 1; j <= n; ++j) {
          const std::size_t header_line =
              take_exact("intervals [" + std::to_string(j) + "]:").line;
          PhoneInterval iv;
          iv.start = expect_number("xmin");
          iv.end = expect_number("xmax");
          iv.label = std::string(detail::trim(expect_any_string("text")));
          if (iv.start >= iv.end) throw ParseError("empty interval", header_line);
          if (iv.start < 0.0) throw ParseError("negative interval start", header_line);
          if (iv.end > doc.total_duration + kBoundsSlack || iv.start < doc.start - kBoundsSlack)
            throw ParseError("interval outside TextGrid bounds", header_line);
          tier.intervals.push_back(std::move(iv));
          lines.push_back(header_line);
        }
        std::vector<std::size_t> order(tier.intervals.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return tier.intervals[a].start < tier.intervals[b].start;
        });
        std::vector<PhoneInterval> sorted;
        sorted.reserve(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
          const PhoneInterval& iv = tier.intervals[order[k]];
          if (!sorted.empty() && iv.start < sorted.back().end)
            throw ParseError("overlapping intervals in tier \"" + name + "\"", lines[order[k]]);
          sorted.push_back(iv);
        }
        tier.intervals = std::move(sorted);
        (void)tier_start;
        (void)tier_end;
        doc.tiers.push_back(std::move(tier));
      } else if (cls == "TextTier") {
        const long n = expect_count("points: size");
        for (long j = 1; j <= n; ++j) {
          take_exact("points [" + std::to_string(j) + "]:");
          Entry t = take_any();
          if (t.key != "number" && t.key != "time")
            throw ParseError("expected point time, found '" + t.key + "'", t.line);
          if (!detail::parse_double(t.raw)) throw ParseError("malformed number", t.line);
          expect_any_string("mark");
        }
      } else {
        throw ParseError("unknown tier class \"" + cls + "\"", last_line_);
      }
    }
    if (auto extra = reader_.next())
      throw ParseError("unexpected trailing content '" + extra->key + "'", extra->line);
    return doc;
  }

 private:
  Entry take_any() {
    auto e = reader_.next();
    if (!e) throw ParseError("unexpected end of file", reader_.line());
    last_line_ = e->line;
    return std::move(*e);
  }

  Entry take(const std::string& key) {
    Entry e = take_any();
    if (e.key != key) throw ParseError("expected '" + key + "', found '" + e.key + "'", e.line);
    return e;
  }

  Entry take_exact(const std::string& key) {
    Entry e = take(key);
    if (!e.raw.empty() || e.quoted) throw ParseError("unexpected value after '" + key + "'", e.line);
    return e;
  }

  std::string expect_any_string(const std::string& key) {
    Entry e = take(key);
    if (!e.quoted) throw ParseError("expected quoted string for '" + key + "'", e.line);
    return e.text;
  }

  void expect_string(const std::string& key, const std::string& value) {
    Entry e = take(key);
    if (!e.quoted || e.text != value)
      throw ParseError("malformed header: expected " + key + " = \"" + value + "\"", e.line);
  }

  double expect_number(const std::string& key) {
    Entry e = take(key);
    auto v = detail::parse_double(e.raw);
    if (e.quoted || !v) throw ParseError("malformed number for '" + key + "'", e.line);
    return *v;
  }

  long expect_count(const std::string& key) {
    const std::size_t line = last_line_;
    const double v = expect_number(key);
    if (v < 0 || v != static_cast<double>(static_cast<long>(v)))
      throw ParseError("invalid count for '" + key + "'", line);
    return static_cast<long>(v);
  }

  EntryReader reader_;
  std::size_t last_line_ = 1;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

const Tier* AlignmentDoc::find_tier(std::string_view name) const {
  for (const auto& t : tiers)
    if (t.name == name) return &t;
  return nullptr;
}

AlignmentDoc parse_textgrid(std::string_view bytes) {
  return Parser(decode_text(bytes)).parse();
}

AlignmentDoc load_textgrid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open TextGrid " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_textgrid(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.message(), e.line());
  }
}

std::string serialize_textgrid(const AlignmentDoc& doc) {
  using detail::format_shortest;
  std::ostringstream os;
  os << "File type = \"ooTextFile\"\n"
     << "Object class = \"TextGrid\"\n\n"
     << "xmin = " << format_shortest(doc.start) << " \n"
     << "xmax = " << format_shortest(doc.total_duration) << " \n"
     << "tiers? <exists> \n"
     << "size = " << doc.tiers.size() << " \n"
     << "item []: \n";
  for (std::size_t i = 0; i < doc.tiers.size(); ++i) {
    const Tier& t = doc.tiers[i];
    os << "    item [" << i + 1 << "]:\n"
       << "        class = \"IntervalTier\" \n"
       << "        name = " << quote(t.name) << " \n"
       << "        xmin = " << format_shortest(doc.start) << " \n"
       << "        xmax = " << format_shortest(doc.total_duration) << " \n"
       << "        intervals: size = " << t.intervals.size() << " \n";
    for (std::size_t j = 0; j < t.intervals.size(); ++j) {
      const PhoneInterval& iv = t.intervals[j];
      os << "        intervals [" << j + 1 << "]:\n"
         << "            xmin = " << format_shortest(iv.start) << " \n"
         << "            xmax = " << format_shortest(iv.end) << " \n"
         << "            text = " << quote(iv.label) << " \n";
    }
  }
  return os.str();
}

void validate_alignment(const AlignmentDoc& doc, std::span<const std::string> required_tiers) {
  for (const auto& name : required_tiers)
    if (!doc.find_tier(name)) throw StructuralError("missing required tier \"" + name + "\"");
}

}  // namespace vowelprompt
