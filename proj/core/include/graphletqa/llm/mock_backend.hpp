#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "graphletqa/llm/gateway.hpp"

namespace graphletqa::llm {

/// Injection rates are fractions in [0, 1]. Every decision is a function of
/// the prompt text and a per-purpose salt, so reruns plant the same faults.
struct MockOptions {
  double generation_parse_failure = 0.0;
  double role_violation = 0.0;
  double judge_rejection = 0.0;
  double judge_parse_failure = 0.0;
  double evidence_relevance = 0.6;
  /// Fraction of relevant assessments that carry a paraphrased snippet.
  double paraphrase = 0.0;
  double rephrase_violation = 0.0;
  std::chrono::milliseconds latency{0};
  /// After this many calls every call fails at the transport level.
  /// 0 disables; used to simulate an interrupted run.
  std::uint64_t fail_after_calls = 0;
};

struct MockStats {
  std::uint64_t calls = 0;
  std::uint64_t max_in_flight = 0;
  std::uint64_t planted_generation_parse_failures = 0;
  std::uint64_t planted_role_violations = 0;
  std::uint64_t planted_judge_rejections = 0;
  std::uint64_t planted_judge_parse_failures = 0;
  std::uint64_t planted_paraphrases = 0;
  std::uint64_t planted_rephrase_violations = 0;
};

/// Deterministic stand-in for a chat model. Dispatches on the stage tag in
/// the prompt and answers with templated JSON built from the prompt content.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(MockOptions options = {});

  BackendReply send(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }

  /// Response for a prompt, without touching counters or latency.
  std::string respond(std::string_view prompt) const;

  /// True when hash(salt, prompt) falls below rate.
  static bool decide(std::string_view salt, std::string_view prompt, double rate);

  MockStats stats() const;
  const MockOptions& options() const noexcept { return options_; }

 private:
  enum class Plant { none, generation_parse, role, judge_reject, judge_parse, paraphrase, rephrase };
  std::string respond(std::string_view prompt, Plant& planted) const;

  MockOptions options_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> in_flight_{0};
  std::atomic<std::uint64_t> max_in_flight_{0};
  std::atomic<std::uint64_t> planted_[7]{};
};

}  // namespace graphletqa::llm
