#include "pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "vowelprompt/audio.hpp"
#include "vowelprompt/dsp.hpp"
#include "vowelprompt/error.hpp"
#include "vowelprompt/jsonl.hpp"
#include "vowelprompt/rlvr.hpp"
#include "vowelprompt/textgrid.hpp"

namespace vowelprompt::cli {
namespace {

// Runs f(0..n-1) on up to `jobs` threads and rethrows the first failure in
// index order, so error reporting does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Prefixes the utterance id while keeping the error category.
template <typename F>
auto for_utterance(const std::string& id, F&& f) {
  try {
    return f();
  } catch (const IoError& e) {
    throw IoError("utterance " + id + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("utterance " + id + ": " + e.what());
  }
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<UtteranceLLDs> extract_corpus(std::span<const UtteranceEntry> entries,
                                          const PipelineConfig& cfg, const PhoneMap& phones,
                                          const ExtractOptions& opts, std::ostream& log) {
  const std::size_t n = entries.size();
  std::vector<AudioBuffer> audio(n);
  std::vector<AlignmentDoc> docs(n);
  const std::vector<std::string> required = {cfg.tiers.phones};
  parallel_for(n, opts.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    for_utterance(e.utterance_id, [&] {
      audio[i] = load_audio(e.audio_path);
      docs[i] = load_textgrid(e.alignment_path);
      validate_alignment(docs[i], required);
    });
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!docs[i].find_tier(cfg.tiers.words))
      log << "warning: " << entries[i].alignment_path.string() << " has no \"" << cfg.tiers.words
          << "\" tier; host words will be empty\n";

  // Speakers in first-appearance order.
  std::vector<std::string> speakers;
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, fresh] = members.try_emplace(entries[i].speaker_id);
    if (fresh) speakers.push_back(entries[i].speaker_id);
    it->second.push_back(i);
  }
  std::vector<PitchBounds> speaker_bounds(speakers.size());
  parallel_for(speakers.size(), opts.jobs, [&](std::size_t s) {
    std::vector<AudioBuffer> buffers;
    for (std::size_t i : members.at(speakers[s])) buffers.push_back(audio[i]);
    try {
      speaker_bounds[s] = adaptive_pitch_bounds(buffers, cfg.pitch);
    } catch (const ValidationError& e) {
      throw ValidationError("speaker " + speakers[s] + ": " + e.what());
    }
  });
  std::map<std::string, PitchBounds> bounds_of;
  for (std::size_t s = 0; s < speakers.size(); ++s) bounds_of[speakers[s]] = speaker_bounds[s];

  std::vector<UtteranceLLDs> rows(n);
  std::vector<std::string> dumps(opts.dump_contours ? n : 0);
  parallel_for(n, opts.jobs, [&](std::size_t i) {
    const auto& e = entries[i];
    for_utterance(e.utterance_id, [&] {
      UtteranceLLDs& row = rows[i];
      row.utterance_id = e.utterance_id;
      row.speaker_id = e.speaker_id;
      row.language = e.language;
      row.pitch_bounds = bounds_of.at(e.speaker_id);
      const Contour f0 = f0_contour(audio[i], row.pitch_bounds, cfg.pitch);
      const Contour inten = intensity_contour(audio[i], cfg.intensity);
      for (const auto& seg : extract_vowel_segments(e, docs[i], phones, cfg.tiers))
        row.vowels.push_back(segment_lld(seg, f0, inten));

      if (opts.dump_contours) {
        std::ostringstream os;
        for (std::size_t f = 0; f < f0.size(); ++f) {
          const double t = f0.center(f);
          const auto k = static_cast<std::size_t>(std::clamp<double>(
              std::floor((t - inten.covered_begin()) / inten.frame_hop), 0.0,
              static_cast<double>(inten.size() - 1)));
          nlohmann::ordered_json j;
          j["id"] = e.utterance_id;
          j["time"] = t;
          j["f0"] = f0.values[f] ? nlohmann::ordered_json(*f0.values[f]) : nlohmann::ordered_json(nullptr);
          j["intensity_db"] = *inten.values[k];
          os << j.dump() << '\n';
        }
        dumps[i] = os.str();
      }
    });
  });

  if (opts.dump_contours) {
    std::string all;
    for (const auto& d : dumps) all += d;
    write_file_atomic(*opts.dump_contours, all);
  }
  return rows;
}

std::vector<VowelLLD> flatten(std::span<const UtteranceLLDs> rows) {
  std::vector<VowelLLD> out;
  for (const auto& r : rows) out.insert(out.end(), r.vowels.begin(), r.vowels.end());
  return out;
}

std::string prediction_label(std::string_view output, std::span<const std::string> labels) {
  std::string raw;
  if (auto answer = parse_output(output).answer) {
    raw = *answer;
  } else {
    const auto begin = output.find_first_not_of(" \t\r\n");
    if (begin != std::string_view::npos) {
      const auto end = output.find_first_of(" \t\r\n", begin);
      raw = std::string(output.substr(begin, end == std::string_view::npos ? end : end - begin));
    }
    auto punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    while (!raw.empty() && punct(static_cast<unsigned char>(raw.back()))) raw.pop_back();
    while (!raw.empty() && punct(static_cast<unsigned char>(raw.front()))) raw.erase(raw.begin());
  }
  const std::string key = to_lower(raw);
  for (const auto& l : labels)
    if (to_lower(l) == key) return l;
  return raw;
}

}  // namespace vowelprompt::cli
