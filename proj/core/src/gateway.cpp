#include "vowelprompt/gateway.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <regex>
#include <sstream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "vowelprompt/jsonl.hpp"

namespace vowelprompt {
namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

std::optional<ParsedUrl> parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/\s?#]+)(/[^\s?#]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) return std::nullopt;
  ParsedUrl p;
  p.scheme_host_port = m[1].str();
  p.path_prefix = m[2].matched ? m[2].str() : "";
  while (!p.path_prefix.empty() && p.path_prefix.back() == '/') p.path_prefix.pop_back();
  return p;
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

void sleep_backoff(const GatewayConfig& cfg, int retry) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_real_distribution<double> jitter(0.0, 0.25);
  const double base = cfg.backoff_base_s * std::pow(cfg.backoff_factor, retry - 1);
  const double s = base * (1.0 + jitter(rng));
  std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

void set_timeouts(httplib::Client& cli, double seconds) {
  const auto sec = static_cast<time_t>(seconds);
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace

void GatewayConfig::validate() const {
  if (!parse_url(base_url)) throw ValidationError("gateway: malformed base_url \"" + base_url + "\"");
  if (model_name.empty()) throw ValidationError("gateway: model name is required (--model)");
  if (api_key.empty())
    throw ValidationError(std::string("gateway: API key missing; set ") + kApiKeyEnv);
  if (max_concurrency < 1) throw ValidationError("gateway: concurrency must be >= 1");
  if (max_retries < 0 || max_retries > 10)
    throw ValidationError("gateway: max_retries must be in [0, 10]");
  if (!(timeout_s > 0.0)) throw ValidationError("gateway: timeout must be positive");
  if (!(temperature >= 0.0)) throw ValidationError("gateway: temperature must be >= 0");
  if (!(backoff_base_s >= 0.0) || !(backoff_factor >= 1.0))
    throw ValidationError("gateway: backoff base must be >= 0 and factor >= 1");
}

std::string api_key_from_env() {
  const char* v = std::getenv(kApiKeyEnv);
  return v ? std::string(v) : std::string();
}

std::string_view gateway_error_kind_name(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::kHttpStatus: return "http_status";
    case GatewayErrorKind::kRetriesExhausted: return "retries_exhausted";
    case GatewayErrorKind::kTimeout: return "timeout";
    case GatewayErrorKind::kTransport: return "transport";
    case GatewayErrorKind::kBadResponse: return "bad_response";
  }
  return "unknown";
}

ChatResult chat_complete(const GatewayConfig& cfg, std::string_view prompt) {
  cfg.validate();
  const ParsedUrl url = *parse_url(cfg.base_url);
  const std::string route = url.path_prefix + "/chat/completions";

  nlohmann::json body = {
      {"model", cfg.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", cfg.temperature}};
  const std::string payload = body.dump();
  const httplib::Headers headers = {{"Authorization", "Bearer " + cfg.api_key}};

  GatewayErrorKind last_kind = GatewayErrorKind::kTransport;
  int last_status = 0;
  std::string last_detail;
  const int max_attempts = cfg.max_retries + 1;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) sleep_backoff(cfg, attempt - 1);

    httplib::Client cli(url.scheme_host_port);
    if (!cli.is_valid())
      throw GatewayError(GatewayErrorKind::kTransport, 0, attempt,
                         "gateway: cannot create client for " + url.scheme_host_port +
                             " (https requires OpenSSL support)");
    set_timeouts(cli, cfg.timeout_s);

    const auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post(route, headers, payload, "application/json");
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read && elapsed >= cfg.timeout_s * 0.95);
      last_kind = timed_out ? GatewayErrorKind::kTimeout : GatewayErrorKind::kTransport;
      last_status = 0;
      last_detail = httplib::to_string(err);
      continue;
    }
    last_status = res->status;
    if (res->status == 200) {
      try {
        const auto j = nlohmann::json::parse(res->body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return ChatResult{content.is_null() ? std::string() : content.get<std::string>(), attempt};
      } catch (const nlohmann::json::exception& e) {
        throw GatewayError(GatewayErrorKind::kBadResponse, 200, attempt,
                           std::string("gateway: malformed completion response: ") + e.what());
      }
    }
    if (!retryable_status(res->status))
      throw GatewayError(GatewayErrorKind::kHttpStatus, res->status, attempt,
                         "gateway: HTTP " + std::to_string(res->status));
    last_kind = GatewayErrorKind::kRetriesExhausted;
    last_detail = "HTTP " + std::to_string(res->status);
  }
  throw GatewayError(last_kind, last_status, max_attempts,
                     "gateway: giving up after " + std::to_string(max_attempts) + " attempts (" +
                         last_detail + ")");
}

nlohmann::ordered_json to_json(const InferenceRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.utterance_id;
  j["request_prompt"] = r.request_prompt;
  j["output_text"] = r.output_text ? nlohmann::ordered_json(*r.output_text) : nlohmann::ordered_json(nullptr);
  j["error"] = r.error ? nlohmann::ordered_json(*r.error) : nlohmann::ordered_json(nullptr);
  j["http_status"] = r.http_status;
  j["latency_s"] = r.latency_s;
  j["attempt_count"] = r.attempt_count;
  return j;
}

InferenceRecord inference_record_from_json(const nlohmann::json& j) {
  InferenceRecord r;
  r.utterance_id = j.at("id").get<std::string>();
  r.request_prompt = j.value("request_prompt", std::string());
  if (auto it = j.find("output_text"); it != j.end() && !it->is_null()) r.output_text = it->get<std::string>();
  if (auto it = j.find("error"); it != j.end() && !it->is_null()) r.error = it->get<std::string>();
  if (r.output_text.has_value() == r.error.has_value())
    throw ValidationError(r.utterance_id + ": exactly one of output_text and error must be set");
  r.http_status = j.value("http_status", 0);
  r.latency_s = j.value("latency_s", 0.0);
  r.attempt_count = j.value("attempt_count", 0);
  return r;
}

RunSummary run_dataset(const GatewayConfig& cfg, const std::filesystem::path& prompts,
                       const std::filesystem::path& out, const RunOptions& opts) {
  cfg.validate();

  struct Job {
    std::string id;
    std::string prompt;
  };
  std::vector<Job> inputs;
  std::map<std::string, std::size_t> input_index;
  for_each_jsonl(prompts, [&](const nlohmann::json& j, std::size_t) {
    Job job{j.at("id").get<std::string>(), j.at("prompt").get<std::string>()};
    if (!input_index.emplace(job.id, inputs.size()).second)
      throw ValidationError("duplicate id \"" + job.id + "\"");
    inputs.push_back(std::move(job));
  });

  // Existing output, keyed by id, in file order.
  std::map<std::string, InferenceRecord> existing;
  std::vector<std::string> existing_order;
  if (std::filesystem::exists(out)) {
    for_each_jsonl(out, [&](const nlohmann::json& j, std::size_t) {
      InferenceRecord r = inference_record_from_json(j);
      if (!existing.contains(r.utterance_id)) existing_order.push_back(r.utterance_id);
      existing[r.utterance_id] = std::move(r);
    });
  }

  RunSummary summary;
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto it = existing.find(inputs[i].id);
    if (it != existing.end() && !(opts.retry_errors && it->second.error)) {
      ++summary.n_skipped;
      continue;
    }
    if (it != existing.end()) existing.erase(it);
    todo.push_back(i);
  }

  auto write_all = [&](const std::vector<InferenceRecord>& fresh) {
    std::map<std::string, const InferenceRecord*> by_id;
    for (const auto& [id, r] : existing) by_id[id] = &r;
    for (const auto& r : fresh) by_id[r.utterance_id] = &r;
    std::ostringstream os;
    for (const auto& job : inputs)
      if (auto it = by_id.find(job.id); it != by_id.end()) os << to_json(*it->second).dump() << '\n';
    // Records for ids no longer in the input are kept, after the ordered ones.
    for (const auto& id : existing_order)
      if (!input_index.contains(id) && existing.contains(id)) os << to_json(existing.at(id)).dump() << '\n';
    write_file_atomic(out, os.str());
  };

  if (todo.empty()) {
    if (opts.retry_errors) write_all({});
    return summary;
  }
  // Drop stale error records before appending their replacements.
  write_all({});

  std::vector<std::optional<InferenceRecord>> results(todo.size());
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < todo.size(); k = next.fetch_add(1)) {
      const Job& job = inputs[todo[k]];
      InferenceRecord rec;
      rec.utterance_id = job.id;
      rec.request_prompt = job.prompt;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        ChatResult res = chat_complete(cfg, job.prompt);
        rec.output_text = std::move(res.text);
        rec.attempt_count = res.attempts;
        rec.http_status = 200;
      } catch (const GatewayError& e) {
        rec.error = std::string(gateway_error_kind_name(e.kind())) + ": " + e.what();
        rec.attempt_count = e.attempts();
        rec.http_status = e.http_status();
      }
      rec.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      {
        std::lock_guard lock(mu);
        results[k] = std::move(rec);
      }
      cv.notify_all();
    }
  };

  const std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.max_concurrency), todo.size());
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);

  // Single writer: append in input order as results become available.
  std::vector<InferenceRecord> fresh;
  fresh.reserve(todo.size());
  {
    std::ofstream append(out, std::ios::app);
    if (!append) {
      for (auto& t : pool) t.join();
      throw IoError("cannot append to " + out.string());
    }
    for (std::size_t k = 0; k < todo.size(); ++k) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return results[k].has_value(); });
      InferenceRecord rec = std::move(*results[k]);
      lock.unlock();
      append << to_json(rec).dump() << '\n';
      append.flush();
      if (rec.error) ++summary.n_err;
      else ++summary.n_ok;
      fresh.push_back(std::move(rec));
    }
  }
  for (auto& t : pool) t.join();
  write_all(fresh);
  return summary;
}

}  // namespace vowelprompt
