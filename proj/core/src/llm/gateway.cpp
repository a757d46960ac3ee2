#include "graphletqa/llm/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <thread>
#include <vector>

#include "graphletqa/errors.hpp"
#include "graphletqa/util/hash.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::llm {

namespace {

bool retryable(const BackendReply& reply) {
  if (reply.transport_failed) return true;
  const int s = reply.http_status;
  return s == 408 || s == 429 || s >= 500;
}

}  // namespace

std::string_view to_string(CompletionStatus status) {
  switch (status) {
    case CompletionStatus::success: return "success";
    case CompletionStatus::transport_error: return "transport_error";
    case CompletionStatus::http_error: return "http_error";
  }
  return "unknown";
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw ConfigError("gateway needs a backend");
  if (options_.max_in_flight == 0) throw ConfigError("max_in_flight must be at least 1");
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  if (!options_.audit_log.empty()) {
    if (options_.audit_log.has_parent_path()) std::filesystem::create_directories(options_.audit_log.parent_path());
    audit_.open(options_.audit_log, std::ios::binary | std::ios::app);
    if (!audit_) throw PathError(options_.audit_log, "cannot open audit log");
  }
}

void Gateway::audit(const CompletionRequest& request, const CompletionResult& result) {
  if (!audit_.is_open()) return;
  nlohmann::json line = {{"request_id", request.request_id},
                         {"prompt_sha256", util::sha256_hex(request.prompt)},
                         {"status", to_string(result.status)},
                         {"http_status", result.http_status},
                         {"latency_ms", result.latency.count()},
                         {"retries", result.retries}};
  if (!result.error.empty()) line["error"] = result.error;
  std::lock_guard lock(audit_mu_);
  audit_ << util::dump_line(line) << '\n';
  audit_.flush();
}

CompletionResult Gateway::complete(const CompletionRequest& request) {
  if (request.prompt.empty()) throw ConfigError("request " + request.request_id + " has an empty prompt");
  CompletionResult result;
  result.request_id = request.request_id;
  const auto start = std::chrono::steady_clock::now();
  auto backoff = options_.retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    const BackendReply reply = backend_->send(request);
    result.http_status = reply.http_status;
    result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    if (!reply.transport_failed && reply.http_status >= 200 && reply.http_status < 300) {
      result.status = CompletionStatus::success;
      result.text = reply.text;
      result.retries = attempt;
      spdlog::debug("llm {} ok after {} retries", request.request_id, attempt);
      audit(request, result);
      return result;
    }
    result.retries = attempt;
    result.error = reply.transport_failed ? reply.error : "HTTP " + std::to_string(reply.http_status) + " " + reply.error;
    if (!retryable(reply)) {
      result.status = CompletionStatus::http_error;
      audit(request, result);
      throw HttpStatusError(reply.http_status, request.request_id + ": " + reply.error);
    }
    if (attempt >= options_.retry.max_retries) {
      result.status = CompletionStatus::transport_error;
      audit(request, result);
      throw TransportError(request.request_id + ": giving up after " + std::to_string(attempt) +
                           " retries: " + result.error);
    }
    spdlog::debug("llm {} attempt {} failed ({}), backing off {} ms", request.request_id, attempt + 1,
                  result.error, backoff.count());
    options_.sleep(backoff);
    backoff = std::min(backoff * 2, options_.retry.max_backoff);
  }
}

void Gateway::complete_batch(std::span<const CompletionRequest> requests,
                             const std::function<void(std::size_t, const CompletionResult&)>& on_result) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_index = SIZE_MAX;
  std::exception_ptr failure;

  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= requests.size()) return;
      try {
        auto result = complete(requests[i]);
        std::lock_guard lock(mu);
        on_result(i, result);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };

  const std::size_t n = std::min(options_.max_in_flight, requests.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<nlohmann::json> run_checkpointed(
    Gateway& gateway, std::size_t count, const std::function<std::string(std::size_t)>& key,
    const std::function<CompletionRequest(std::size_t)>& make_request,
    const std::function<nlohmann::json(std::size_t, const CompletionResult&)>& finish,
    util::Checkpoint* checkpoint) {
  std::vector<nlohmann::json> out(count);
  std::vector<std::size_t> pending;
  std::vector<CompletionRequest> requests;
  for (std::size_t i = 0; i < count; ++i) {
    const auto k = key(i);
    if (checkpoint) {
      if (const auto* done = checkpoint->find(k)) {
        out[i] = *done;
        continue;
      }
    }
    pending.push_back(i);
    requests.push_back(make_request(i));
  }
  if (checkpoint && !pending.empty() && checkpoint->size() > 0) {
    spdlog::info("resuming {}: {} done, {} to go", checkpoint->path().filename().string(), count - pending.size(),
                 pending.size());
  }
  gateway.complete_batch(requests, [&](std::size_t j, const CompletionResult& result) {
    const std::size_t i = pending[j];
    out[i] = finish(i, result);
    if (checkpoint) checkpoint->append(out[i]);
  });
  return out;
}

}  // namespace graphletqa::llm
