#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphletqa/util/io.hpp"

namespace graphletqa::llm {

struct DecodingParams {
  double temperature = 0.6;
  int max_tokens = 2048;
};

struct CompletionRequest {
  std::string request_id;
  std::string prompt;
  std::string model;
  DecodingParams decoding;
};

enum class CompletionStatus { success, transport_error, http_error };

struct CompletionResult {
  std::string request_id;
  CompletionStatus status = CompletionStatus::success;
  /// Model output; only meaningful on success.
  std::string text;
  int http_status = 0;
  std::chrono::milliseconds latency{0};
  int retries = 0;
  std::string error;
};

/// One attempt against an endpoint, before any retry policy.
struct BackendReply {
  bool transport_failed = false;
  int http_status = 200;
  std::string text;
  std::string error;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply send(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct HttpBackendOptions {
  /// Base URL of an OpenAI-compatible API, e.g. "http://localhost:8000/v1".
  std::string base_url;
  /// Environment variable holding the bearer token; unset means no auth.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::seconds timeout{120};
};

/// POSTs `{base_url}/chat/completions` and returns choices[0].message.content.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  BackendReply send(const CompletionRequest& request) override;
  std::string name() const override { return "http:" + options_.base_url; }

 private:
  HttpBackendOptions options_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30'000};
};

struct GatewayOptions {
  RetryPolicy retry;
  std::size_t max_in_flight = 8;
  /// JSONL audit log; empty disables it.
  std::filesystem::path audit_log;
  /// Injected so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Bounded-concurrency client with exponential-backoff retries.
///
/// Transport failures, 408, 429 and 5xx are retried; any other 4xx fails
/// immediately. Every finished request is appended to the audit log.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options);

  /// Throws TransportError when retries are exhausted and HttpStatusError
  /// for non-retryable statuses.
  CompletionResult complete(const CompletionRequest& request);

  /// Runs requests with at most max_in_flight outstanding. on_result is
  /// called once per successful request, serialised, in completion order.
  /// After the first failure no new requests start; in-flight ones finish
  /// and the failure with the lowest index is rethrown.
  void complete_batch(std::span<const CompletionRequest> requests,
                      const std::function<void(std::size_t, const CompletionResult&)>& on_result);

  const Backend& backend() const noexcept { return *backend_; }
  std::size_t max_in_flight() const noexcept { return options_.max_in_flight; }

 private:
  void audit(const CompletionRequest& request, const CompletionResult& result);

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  std::mutex audit_mu_;
  std::ofstream audit_;
};

std::string_view to_string(CompletionStatus status);

/// Runs `count` items through the gateway, skipping keys already present in
/// the checkpoint. Each fresh result is turned into a record by `finish` and
/// appended to the checkpoint as soon as it arrives. Returns records in item
/// order, mixing checkpointed and fresh ones. checkpoint may be null.
std::vector<nlohmann::json> run_checkpointed(
    Gateway& gateway, std::size_t count, const std::function<std::string(std::size_t)>& key,
    const std::function<CompletionRequest(std::size_t)>& make_request,
    const std::function<nlohmann::json(std::size_t, const CompletionResult&)>& finish,
    util::Checkpoint* checkpoint);

}  // namespace graphletqa::llm
