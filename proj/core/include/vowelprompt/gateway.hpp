#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vowelprompt/error.hpp"

namespace vowelprompt {

inline constexpr const char* kApiKeyEnv = "VOWELPROMPT_API_KEY";

/// Settings for an OpenAI-compatible chat-completions endpoint.
struct GatewayConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name;
  std::string api_key;
  int max_concurrency = 1;
  double timeout_s = 60.0;
  int max_retries = 3;
  double temperature = 0.0;
  /// Backoff before retry n (1-based) is base * factor^(n-1), plus up to 25% jitter.
  double backoff_base_s = 1.0;
  double backoff_factor = 2.0;

  /// Throws ValidationError on a malformed URL, missing key or model,
  /// concurrency < 1, max_retries outside [0, 10], or negative temperature.
  void validate() const;
};

/// Reads the key from VOWELPROMPT_API_KEY; empty if unset.
std::string api_key_from_env();

enum class GatewayErrorKind {
  kHttpStatus,        // non-retryable status (most 4xx)
  kRetriesExhausted,  // retryable status on every attempt
  kTimeout,
  kTransport,         // connection refused, reset, TLS failure
  kBadResponse,       // 200 with a body lacking choices[0].message.content
};

std::string_view gateway_error_kind_name(GatewayErrorKind kind);

class GatewayError : public Error {
 public:
  GatewayError(GatewayErrorKind kind, int http_status, int attempts, const std::string& what)
      : Error(what), kind_(kind), http_status_(http_status), attempts_(attempts) {}

  GatewayErrorKind kind() const noexcept { return kind_; }
  /// Last HTTP status seen, 0 when no response arrived.
  int http_status() const noexcept { return http_status_; }
  int attempts() const noexcept { return attempts_; }

 private:
  GatewayErrorKind kind_;
  int http_status_;
  int attempts_;
};

struct ChatResult {
  std::string text;
  int attempts = 1;
};

/// Posts one user message to <base_url>/chat/completions and returns
/// choices[0].message.content. 429 and 5xx replies are retried up to
/// max_retries times with exponential backoff, as are timeouts and transport
/// failures.
/// Throws GatewayError.
ChatResult chat_complete(const GatewayConfig& cfg, std::string_view prompt);

struct InferenceRecord {
  std::string utterance_id;
  std::string request_prompt;
  std::optional<std::string> output_text;
  std::optional<std::string> error;
  int http_status = 0;
  double latency_s = 0.0;
  int attempt_count = 0;
};

nlohmann::ordered_json to_json(const InferenceRecord& r);
InferenceRecord inference_record_from_json(const nlohmann::json& j);

struct RunSummary {
  std::size_t n_ok = 0;
  std::size_t n_err = 0;
  std::size_t n_skipped = 0;  // already present in the output file
};

struct RunOptions {
  /// Re-send records whose previous attempt ended in an error. By default
  /// every id already present in the output is skipped.
  bool retry_errors = false;
};

/// Runs every prompt of an emitted dataset with at most max_concurrency
/// requests in flight. Records are appended as they complete, in input
/// order, and the file is finally rewritten in input order. Per-record
/// failures are stored in InferenceRecord::error and do not abort the run.
RunSummary run_dataset(const GatewayConfig& cfg, const std::filesystem::path& prompts,
                       const std::filesystem::path& out, const RunOptions& opts = {});

}  // namespace vowelprompt
