#include "commands.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pipeline.hpp"
#include "vowelprompt/config.hpp"
#include "vowelprompt/error.hpp"
#include "vowelprompt/evalkit.hpp"
#include "vowelprompt/gateway.hpp"
#include "vowelprompt/jsonl.hpp"
#include "vowelprompt/lld.hpp"
#include "vowelprompt/norm_quant.hpp"
#include "vowelprompt/prompt.hpp"
#include "vowelprompt/rlvr.hpp"
#include "vowelprompt/verbalizer.hpp"

namespace vowelprompt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct Common {
  std::string config_path;

  PipelineConfig load() const { return config_path.empty() ? PipelineConfig{} : load_config(config_path); }
};

void add_config_flag(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "Pipeline config JSON (see config.example.json)");
}

PhoneMap phone_map_for(const PipelineConfig& cfg) {
  return cfg.phone_map_path ? PhoneMap::load(*cfg.phone_map_path) : PhoneMap::builtin();
}

// A JSON array of label strings.
std::vector<std::string> load_labels(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!doc.is_array() || doc.empty())
    throw ValidationError(path.string() + ": expected a non-empty JSON array of labels");
  std::vector<std::string> labels;
  for (const auto& v : doc) {
    if (!v.is_string()) throw ValidationError(path.string() + ": labels must be strings");
    labels.push_back(v.get<std::string>());
  }
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw ValidationError(path.string() + ": duplicate labels");
  return labels;
}

std::vector<std::string> load_id_list(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
    return doc.get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": expected a JSON array of utterance ids (" + e.what() + ")");
  }
}

// ---- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string manifest, out, dump_contours, phones_tier, words_tier;
  int jobs = 1;
};

int cmd_extract(const Common& common, const ExtractArgs& a, std::ostream&, std::ostream& err) {
  PipelineConfig cfg = common.load();
  if (!a.phones_tier.empty()) cfg.tiers.phones = a.phones_tier;
  if (!a.words_tier.empty()) cfg.tiers.words = a.words_tier;
  const auto entries = load_manifest(a.manifest);
  ExtractOptions opts;
  opts.jobs = a.jobs;
  if (!a.dump_contours.empty()) opts.dump_contours = a.dump_contours;
  const auto rows = extract_corpus(entries, cfg, phone_map_for(cfg), opts, err);
  write_lld_file(a.out, rows);
  std::size_t vowels = 0;
  for (const auto& r : rows) vowels += r.vowels.size();
  err << "extract: " << rows.size() << " utterances, " << vowels << " vowels -> " << a.out << '\n';
  return kExitOk;
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
  std::string manifest, lld, out;
  int k = 0;
  int min_group_count = 0;
  int jobs = 1;
};

int cmd_fit(const Common& common, const FitArgs& a, std::ostream&, std::ostream& err) {
  PipelineConfig cfg = common.load();
  if (a.k != 0) cfg.k = a.k;
  if (a.min_group_count != 0) cfg.min_group_count = a.min_group_count;
  cfg.validate();
  if (a.manifest.empty() == a.lld.empty()) throw ValidationError("fit: give exactly one of --manifest or --lld");

  std::vector<UtteranceLLDs> rows;
  if (!a.lld.empty()) {
    rows = load_lld_file(a.lld);
  } else {
    const auto entries = load_manifest(a.manifest);
    ExtractOptions opts;
    opts.jobs = a.jobs;
    rows = extract_corpus(entries, cfg, phone_map_for(cfg), opts, err);
  }
  const auto llds = flatten(rows);
  NormQuantModel model = fit(llds, cfg.k, cfg.min_group_count);
  // Hash the canonical LLD serialization so --manifest and --lld agree.
  std::string canonical;
  for (const auto& r : rows) canonical += to_json_line(r).dump() + '\n';
  model.fit_corpus_hash = fnv1a64_hex(canonical);
  save_model(a.out, model);
  err << "fit: " << llds.size() << " vowels, K=" << model.k << " -> " << a.out << '\n';
  return kExitOk;
}

// ---- render ----------------------------------------------------------------

struct RenderArgs {
  std::string stats, lld, manifest, templ, out, labels, exemplar_pool;
  int shots = 0;
};

int cmd_render(const Common& common, const RenderArgs& a, std::ostream&, std::ostream& err) {
  PipelineConfig cfg = common.load();
  if (!a.templ.empty()) {
    auto t = template_from_name(a.templ);
    if (!t)
      throw ValidationError("render: unknown template \"" + a.templ + "\"; valid ids: " + template_names_joined());
    cfg.template_id = *t;
  }
  if (a.shots != 0) cfg.shots = a.shots;
  if (!a.labels.empty()) cfg.label_set = load_labels(a.labels);
  cfg.validate();

  const NormQuantModel model = load_model(a.stats);
  const DescriptorLexicon lexicon =
      cfg.lexicon_path ? DescriptorLexicon::load(*cfg.lexicon_path, model.k) : DescriptorLexicon::builtin(model.k);
  const auto entries = load_manifest(a.manifest);

  std::map<std::string, UtteranceLLDs> lld_by_id;
  for (auto& row : load_lld_file(a.lld)) {
    const std::string id = row.utterance_id;
    lld_by_id.emplace(id, std::move(row));
  }
  std::map<std::string, std::string> blocks;
  std::map<std::string, const UtteranceEntry*> entry_by_id;
  for (const auto& e : entries) {
    auto it = lld_by_id.find(e.utterance_id);
    if (it == lld_by_id.end())
      throw ValidationError(a.lld + ": no LLDs for utterance \"" + e.utterance_id + "\" of " + a.manifest);
    std::vector<BinnedVowel> binned;
    for (const auto& v : it->second.vowels) binned.push_back(bin_segment(v, model));
    blocks[e.utterance_id] = utterance_block(binned, lexicon);
    entry_by_id[e.utterance_id] = &e;
  }

  // Exemplar pool: listed ids, or every labelled utterance, in given order.
  std::vector<const UtteranceEntry*> pool;
  if (cfg.template_id == PromptTemplateId::kFewShotVowel) {
    if (!a.exemplar_pool.empty()) {
      for (const auto& id : load_id_list(a.exemplar_pool)) {
        auto it = entry_by_id.find(id);
        if (it == entry_by_id.end())
          throw ValidationError(a.exemplar_pool + ": exemplar \"" + id + "\" is not in " + a.manifest);
        if (!it->second->label) throw ValidationError(a.exemplar_pool + ": exemplar \"" + id + "\" has no label");
        pool.push_back(it->second);
      }
    } else {
      for (const auto& e : entries)
        if (e.label) pool.push_back(&e);
    }
  }

  std::vector<PromptRecord> records;
  records.reserve(entries.size());
  for (const auto& e : entries) {
    std::vector<RenderedExemplar> exemplars;
    if (cfg.template_id == PromptTemplateId::kFewShotVowel) {
      for (const auto* p : pool) {
        if (exemplars.size() == static_cast<std::size_t>(cfg.shots)) break;
        if (p->utterance_id != e.utterance_id) exemplars.push_back(render_exemplar(*p, blocks.at(p->utterance_id)));
      }
      if (exemplars.size() < static_cast<std::size_t>(cfg.shots))
        throw ValidationError("render: utterance \"" + e.utterance_id + "\" needs " + std::to_string(cfg.shots) +
                              " exemplars but the pool offers " + std::to_string(exemplars.size()));
    }
    try {
      records.push_back(build_prompt(e, blocks.at(e.utterance_id), cfg.template_id, cfg.label_set, exemplars));
    } catch (const ValidationError& ex) {
      throw ValidationError(a.manifest + ": utterance \"" + e.utterance_id + "\": " + ex.what());
    }
  }
  const std::size_t n = emit_dataset(records, a.out);
  err << "render: " << n << " prompts (" << template_name(cfg.template_id) << ") -> " << a.out << '\n';
  return kExitOk;
}

// ---- verify / score --------------------------------------------------------

// id -> output text; errored or missing outputs read as "".
std::map<std::string, std::string> load_predictions(const fs::path& path) {
  std::map<std::string, std::string> preds;
  for_each_jsonl(path, [&](const json& j, std::size_t) {
    const auto id = j.at("id").get<std::string>();
    std::string text;
    if (auto it = j.find("output_text"); it != j.end() && !it->is_null()) text = it->get<std::string>();
    if (!preds.emplace(id, std::move(text)).second) throw ValidationError("duplicate id \"" + id + "\"");
  });
  return preds;
}

std::vector<PromptRecord> labelled_golds(const fs::path& path) {
  auto golds = read_dataset(path);
  for (const auto& g : golds)
    if (!g.label) throw ValidationError(path.string() + ": record \"" + g.utterance_id + "\" has no label");
  if (golds.empty()) throw ValidationError(path.string() + ": no records");
  return golds;
}

void check_pred_ids(const std::map<std::string, std::string>& preds, const std::vector<PromptRecord>& golds,
                    const std::string& pred_path) {
  std::set<std::string> ids;
  for (const auto& g : golds) ids.insert(g.utterance_id);
  for (const auto& [id, _] : preds)
    if (!ids.contains(id)) throw ValidationError(pred_path + ": prediction \"" + id + "\" has no gold record");
}

struct VerifyArgs {
  std::string pred, gold, out;
  bool strict_case = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream&) {
  const auto golds = labelled_golds(a.gold);
  const auto preds = load_predictions(a.pred);
  check_pred_ids(preds, golds, a.pred);

  std::ostringstream lines;
  double acc = 0, fmt = 0, total = 0;
  RewardOptions opts;
  opts.strict_case = a.strict_case;
  for (const auto& g : golds) {
    auto it = preds.find(g.utterance_id);
    const std::string output = it == preds.end() ? std::string() : it->second;
    const RewardResult r = reward(output, *g.label, g.label_set, opts);
    ordered_json j;
    j["id"] = g.utterance_id;
    j["r_acc"] = r.r_acc;
    j["r_format"] = r.r_format;
    j["total"] = r.total;
    lines << j.dump() << '\n';
    acc += r.r_acc;
    fmt += r.r_format;
    total += r.total;
  }
  const double n = static_cast<double>(golds.size());
  ordered_json agg;
  agg["n"] = golds.size();
  agg["mean_r_acc"] = acc / n;
  agg["mean_r_format"] = fmt / n;
  agg["mean_total"] = total / n;
  if (a.out.empty()) {
    out << lines.str();
  } else {
    write_file_atomic(a.out, lines.str());
  }
  out << agg.dump() << '\n';
  return kExitOk;
}

struct ScoreArgs {
  std::string pred, gold, labels, out;
};

int cmd_score(const ScoreArgs& a, std::ostream& out, std::ostream&) {
  const auto golds = labelled_golds(a.gold);
  const auto preds = load_predictions(a.pred);
  check_pred_ids(preds, golds, a.pred);
  const std::vector<std::string> labels = a.labels.empty() ? golds.front().label_set : load_labels(a.labels);

  std::vector<std::string> gold_labels, pred_labels;
  for (const auto& g : golds) {
    auto it = preds.find(g.utterance_id);
    gold_labels.push_back(*g.label);
    pred_labels.push_back(it == preds.end() ? std::string() : prediction_label(it->second, labels));
  }
  const ConfusionMatrix cm = confusion(gold_labels, pred_labels, labels);
  const std::string report = report_json(cm, score(cm)).dump(2) + '\n';
  if (!a.out.empty()) write_file_atomic(a.out, report);
  out << report;
  return kExitOk;
}

// ---- infer -----------------------------------------------------------------

struct InferArgs {
  std::string prompts, out, base_url, model;
  int concurrency = 0;
  double temperature = -1.0;
  double timeout_s = 0.0;
  int max_retries = -1;
  bool retry_errors = false;
};

int cmd_infer(const Common& common, const InferArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg = common.load();
  GatewayConfig g = cfg.gateway;
  if (!a.base_url.empty()) g.base_url = a.base_url;
  if (!a.model.empty()) g.model_name = a.model;
  if (a.concurrency != 0) g.max_concurrency = a.concurrency;
  if (a.temperature >= 0.0) g.temperature = a.temperature;
  if (a.timeout_s > 0.0) g.timeout_s = a.timeout_s;
  if (a.max_retries >= 0) g.max_retries = a.max_retries;
  g.api_key = api_key_from_env();
  RunOptions opts;
  opts.retry_errors = a.retry_errors;
  const RunSummary s = run_dataset(g, a.prompts, a.out, opts);
  ordered_json j;
  j["n_ok"] = s.n_ok;
  j["n_err"] = s.n_err;
  j["n_skipped"] = s.n_skipped;
  out << j.dump() << '\n';
  if (s.n_err > 0) err << "infer: " << s.n_err << " records failed; see the error field in " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vowel-level prosody descriptors and prompt datasets for LLM emotion recognition", "vowelprompt"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common common;

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Manifest -> per-utterance vowel LLD JSONL");
  add_config_flag(extract, common);
  extract->add_option("--manifest", ex.manifest, "Manifest JSONL")->required();
  extract->add_option("--out", ex.out, "Output LLD JSONL")->required();
  extract->add_option("--jobs", ex.jobs, "Utterances processed in parallel")->check(CLI::PositiveNumber);
  extract->add_option("--dump-contours", ex.dump_contours, "Also write per-frame f0/intensity JSONL here");
  extract->add_option("--phones-tier", ex.phones_tier, "Phone tier name (default \"phones\")");
  extract->add_option("--words-tier", ex.words_tier, "Word tier name (default \"words\")");

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit normalization statistics and quantile edges");
  add_config_flag(fitc, common);
  auto* fit_manifest = fitc->add_option("--manifest", fa.manifest, "Manifest JSONL (extracts on the fly)");
  auto* fit_lld = fitc->add_option("--lld", fa.lld, "LLD JSONL from extract");
  fit_manifest->excludes(fit_lld);
  fitc->add_option("--out", fa.out, "Output stats JSON")->required();
  fitc->add_option("--k", fa.k, "Number of bins, 2..9 (default 5)")->check(CLI::Range(2, 9));
  fitc->add_option("--min-group-count", fa.min_group_count, "Smallest group with its own moments (default 10)")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--jobs", fa.jobs, "Parallel extraction with --manifest")->check(CLI::PositiveNumber);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render prompt datasets from LLDs and fitted stats");
  add_config_flag(render, common);
  render->add_option("--stats", ra.stats, "Stats JSON from fit")->required();
  render->add_option("--lld", ra.lld, "LLD JSONL from extract")->required();
  render->add_option("--manifest", ra.manifest, "Manifest JSONL with transcripts, context and labels")->required();
  render->add_option("--template", ra.templ, "One of: " + template_names_joined());
  render->add_option("--out", ra.out, "Output prompts JSONL")->required();
  render->add_option("--labels", ra.labels, "JSON array of labels (default: config label_set)");
  render->add_option("--shots", ra.shots, "Exemplars per few-shot prompt (default 3)")->check(CLI::PositiveNumber);
  render->add_option("--exemplar-pool", ra.exemplar_pool,
                     "JSON array of utterance ids to draw exemplars from (default: all labelled)");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Format and accuracy rewards per prediction");
  verify->add_option("--pred", va.pred, "Predictions JSONL (id, output_text)")->required();
  verify->add_option("--gold", va.gold, "Prompts JSONL with labels")->required();
  verify->add_option("--out", va.out, "Write per-id rewards here instead of stdout");
  verify->add_flag("--strict-case", va.strict_case, "Compare answers case-sensitively");

  ScoreArgs sa;
  auto* scorec = app.add_subcommand("score", "UACC, WF1 and confusion matrix report");
  scorec->add_option("--pred", sa.pred, "Predictions JSONL (id, output_text)")->required();
  scorec->add_option("--gold", sa.gold, "Prompts JSONL with labels")->required();
  scorec->add_option("--labels", sa.labels, "JSON array of labels (default: the gold label_set)");
  scorec->add_option("--out", sa.out, "Also write the report here");

  InferArgs ia;
  auto* infer = app.add_subcommand("infer", "Run prompts against an OpenAI-compatible endpoint (key in VOWELPROMPT_API_KEY)");
  add_config_flag(infer, common);
  infer->add_option("--prompts", ia.prompts, "Prompts JSONL from render")->required();
  infer->add_option("--out", ia.out, "Output JSONL; existing records are skipped on rerun")->required();
  infer->add_option("--base-url", ia.base_url, "Endpoint base, e.g. http://127.0.0.1:8000/v1");
  infer->add_option("--model", ia.model, "Model name sent with each request");
  infer->add_option("--concurrency", ia.concurrency, "Requests in flight (default 1)")->check(CLI::PositiveNumber);
  infer->add_option("--temperature", ia.temperature, "Sampling temperature (default 0)")->check(CLI::NonNegativeNumber);
  infer->add_option("--timeout", ia.timeout_s, "Per-request timeout in seconds (default 60)")
      ->check(CLI::PositiveNumber);
  infer->add_option("--max-retries", ia.max_retries, "Retries on 429/5xx/timeouts, 0..10 (default 3)")
      ->check(CLI::Range(0, 10));
  infer->add_flag("--retry-errors", ia.retry_errors, "Re-send records whose earlier attempt failed");

  std::vector<const char*> argv{"vowelprompt"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (*extract) return cmd_extract(common, ex, out, err);
    if (*fitc) return cmd_fit(common, fa, out, err);
    if (*render) return cmd_render(common, ra, out, err);
    if (*verify) return cmd_verify(va, out, err);
    if (*scorec) return cmd_score(sa, out, err);
    if (*infer) return cmd_infer(common, ia, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const GatewayError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace vowelprompt::cli
