#include "vowelprompt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "vowelprompt/error.hpp"

namespace vowelprompt {

void to_json(nlohmann::json& j, const UtteranceEntry& e) {
  nlohmann::json ctx = nlohmann::json::array();
  for (const auto& t : e.context) ctx.push_back({{"speaker", t.speaker}, {"text", t.text}});
  j = {{"utterance_id", e.utterance_id},
       {"speaker_id", e.speaker_id},
       {"language", e.language.tag()},
       {"audio_path", e.audio_path.string()},
       {"alignment_path", e.alignment_path.string()},
       {"transcript", e.transcript},
       {"context", std::move(ctx)},
       {"label", e.label ? nlohmann::json(*e.label) : nlohmann::json(nullptr)}};
}

void from_json(const nlohmann::json& j, UtteranceEntry& e) {
  e.utterance_id = j.at("utterance_id").get<std::string>();
  e.speaker_id = j.at("speaker_id").get<std::string>();
  e.language = Language::parse(j.value("language", std::string("en")));
  e.audio_path = j.at("audio_path").get<std::string>();
  e.alignment_path = j.at("alignment_path").get<std::string>();
  e.transcript = j.at("transcript").get<std::string>();
  e.context.clear();
  if (auto it = j.find("context"); it != j.end() && !it->is_null()) {
    for (const auto& t : *it)
      e.context.push_back({t.at("speaker").get<std::string>(), t.at("text").get<std::string>()});
  }
  e.label.reset();
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) e.label = it->get<std::string>();

  if (e.utterance_id.empty()) throw ValidationError("utterance_id is empty");
  if (e.speaker_id.empty()) throw ValidationError("speaker_id is empty");
  if (e.audio_path.empty()) throw ValidationError("audio_path is empty");
  if (e.alignment_path.empty()) throw ValidationError("alignment_path is empty");
}

std::vector<UtteranceEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();

  std::vector<UtteranceEntry> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    UtteranceEntry e;
    try {
      e = nlohmann::json::parse(line).get<UtteranceEntry>();
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const ValidationError& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    if (!seen.insert(e.utterance_id).second)
      throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                            ": duplicate utterance_id \"" + e.utterance_id + "\"");
    if (e.audio_path.is_relative()) e.audio_path = base / e.audio_path;
    if (e.alignment_path.is_relative()) e.alignment_path = base / e.alignment_path;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<VowelSegment> extract_vowel_segments(const UtteranceEntry& entry,
                                                 const AlignmentDoc& doc,
                                                 const PhoneMap& phones,
                                                 const TierNames& tiers) {
  const Tier* phone_tier = doc.find_tier(tiers.phones);
  if (!phone_tier)
    throw StructuralError(entry.utterance_id + ": missing phones tier \"" + tiers.phones + "\"");
  const Tier* word_tier = doc.find_tier(tiers.words);

  std::vector<PhoneInterval> ivs = phone_tier->intervals;
  std::stable_sort(ivs.begin(), ivs.end(),
                   [](const PhoneInterval& a, const PhoneInterval& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < ivs.size(); ++i)
    if (ivs[i].start < ivs[i - 1].end)
      throw StructuralError(entry.utterance_id + ": overlapping phones at " +
                            std::to_string(ivs[i].start) + " s");

  std::vector<VowelSegment> out;
  for (const auto& iv : ivs) {
    if (iv.label.empty()) continue;
    auto ipa = phones.to_ipa(iv.label, entry.language);
    if (!ipa) continue;
    if (!(iv.end > iv.start))
      throw StructuralError(entry.utterance_id + ": empty phone interval");

    VowelSegment seg;
    seg.utterance_id = entry.utterance_id;
    seg.speaker_id = entry.speaker_id;
    seg.language = entry.language;
    seg.ipa = std::move(*ipa);
    seg.start = iv.start;
    seg.end = iv.end;
    seg.index_in_utterance = static_cast<int>(out.size());
    if (word_tier) {
      const double mid = 0.5 * (iv.start + iv.end);
      for (const auto& w : word_tier->intervals) {
        if (mid >= w.start && mid < w.end) {
          seg.word = w.label;
          break;
        }
      }
    }
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace vowelprompt
