#include <gtest/gtest.h>

#include <atomic>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/llm/gateway.hpp"
#include "graphletqa/llm/mock_backend.hpp"
#include "graphletqa/llm/structured.hpp"
#include "graphletqa/prompt/prompts.hpp"
#include "graphletqa/util/io.hpp"
#include "oracles.hpp"

using namespace graphletqa;
using namespace graphletqa::llm;

namespace {

// Replays scripted replies, then succeeds.
class ScriptedBackend final : public Backend {
 public:
  explicit ScriptedBackend(std::deque<BackendReply> script) : script_(std::move(script)) {}
  BackendReply send(const CompletionRequest& request) override {
    std::lock_guard lock(mu_);
    ++calls;
    if (script_.empty()) return {false, 200, "ok:" + request.request_id, ""};
    auto r = script_.front();
    script_.pop_front();
    return r;
  }
  std::string name() const override { return "scripted"; }
  int calls = 0;

 private:
  std::mutex mu_;
  std::deque<BackendReply> script_;
};

GatewayOptions recording(std::vector<std::chrono::milliseconds>& sleeps) {
  GatewayOptions o;
  o.sleep = [&sleeps](std::chrono::milliseconds d) { sleeps.push_back(d); };
  return o;
}

}  // namespace

TEST(Structured, ExtractsFirstObjectFromNoise) {
  const auto j = extract_json_object("Sure! ```json\n{\"a\": \"}{\", \"b\": {\"c\": 1}}\n``` trailing {\"z\":0}");
  ASSERT_TRUE(j);
  EXPECT_EQ(j->at("a"), "}{");
  EXPECT_EQ(j->at("b").at("c"), 1);
  EXPECT_FALSE(extract_json_object("no json here"));
  EXPECT_FALSE(extract_json_object("{\"truncated\": "));
  const auto second = extract_json_object("{not json} {\"ok\": true}");
  ASSERT_TRUE(second);
  EXPECT_EQ(second->at("ok"), true);
}

TEST(Structured, SchemaChecks) {
  const std::string gen =
      R"({"question_nodes": ["A"], "hidden_nodes": [], "answer_node": "B", "question": "q?", "answer": "a"})";
  EXPECT_TRUE(parse_structured(gen, StageSchema::generation).ok());
  const auto missing = parse_structured(R"({"question": "q?"})", StageSchema::generation);
  EXPECT_FALSE(missing.ok());
  EXPECT_FALSE(missing.failure.empty());
  EXPECT_EQ(missing.raw, R"({"question": "q?"})");
  EXPECT_FALSE(parse_structured(R"({"valid_question": "yes", "original_answer_valid": true})", StageSchema::judge).ok());
  EXPECT_TRUE(parse_structured(R"({"valid_question": true, "original_answer_valid": false})", StageSchema::judge).ok());
  EXPECT_TRUE(parse_structured(R"({"relevant": true, "snippets": ["x"]})", StageSchema::evidence).ok());
  EXPECT_FALSE(parse_structured(R"({"relevant": true, "snippets": [1]})", StageSchema::evidence).ok());
  EXPECT_TRUE(parse_structured(R"({"question": "q", "context": "c", "label": "yes"})", StageSchema::rephrase_yes_no).ok());
  EXPECT_TRUE(parse_structured(R"({"question": "q", "options": {"A": "x"}, "answer": "A"})", StageSchema::rephrase_mcq).ok());
  EXPECT_FALSE(parse_structured("prose only", StageSchema::judge).ok());
}

TEST(Mock, PureFunctionOfPrompt) {
  MockBackend a;
  MockBackend b;
  const auto p = prompt::judge_prompt("Q?", "A.");
  EXPECT_EQ(a.respond(p), b.respond(p));
  EXPECT_TRUE(parse_structured(a.respond(p), StageSchema::judge).ok());
  EXPECT_TRUE(MockBackend::decide("s", p, 1.0));
  EXPECT_FALSE(MockBackend::decide("s", p, 0.0));
  EXPECT_THROW(MockBackend(MockOptions{.judge_rejection = 1.5}), ConfigError);
}

TEST(Mock, CountsPlantedRejections) {
  MockOptions o;
  o.judge_rejection = 1.0;
  MockBackend mock(o);
  for (int i = 0; i < 5; ++i) {
    const auto reply = mock.send({"r" + std::to_string(i), prompt::judge_prompt("Q" + std::to_string(i), "A"), "m", {}});
    const auto parsed = parse_structured(reply.text, StageSchema::judge);
    ASSERT_TRUE(parsed.ok());
    EXPECT_FALSE(parsed.object->at("valid_question").get<bool>() &&
                 parsed.object->at("original_answer_valid").get<bool>());
  }
  EXPECT_EQ(mock.stats().calls, 5u);
  EXPECT_EQ(mock.stats().planted_judge_rejections, 5u);
}

TEST(Mock, FailAfterCallsSimulatesOutage) {
  MockOptions o;
  o.fail_after_calls = 2;
  MockBackend mock(o);
  const CompletionRequest req{"r", prompt::judge_prompt("Q", "A"), "m", {}};
  EXPECT_FALSE(mock.send(req).transport_failed);
  EXPECT_FALSE(mock.send(req).transport_failed);
  EXPECT_TRUE(mock.send(req).transport_failed);
}

TEST(Gateway, RetriesThrottlingThenSucceeds) {
  auto backend = std::make_shared<ScriptedBackend>(std::deque<BackendReply>{{false, 429, "", "slow down"},
                                                                            {false, 503, "", "busy"}});
  std::vector<std::chrono::milliseconds> sleeps;
  oracle::TempDir dir;
  auto opts = recording(sleeps);
  opts.audit_log = dir / "audit.jsonl";
  {
    Gateway gw(backend, opts);
    const auto r = gw.complete({"id1", "p", "m", {}});
    EXPECT_EQ(r.status, CompletionStatus::success);
    EXPECT_EQ(r.retries, 2);
    EXPECT_EQ(r.text, "ok:id1");
  }
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500),
                                                            std::chrono::milliseconds(1000)}));
  std::vector<nlohmann::json> lines;
  util::read_jsonl(dir / "audit.jsonl", [&](const nlohmann::json& j, std::size_t) { lines.push_back(j); });
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0].at("request_id"), "id1");
  EXPECT_EQ(lines[0].at("retries"), 2);
  EXPECT_EQ(lines[0].at("status"), "success");
}

TEST(Gateway, ClientErrorIsNotRetried) {
  auto backend = std::make_shared<ScriptedBackend>(std::deque<BackendReply>{{false, 400, "", "bad request"}});
  std::vector<std::chrono::milliseconds> sleeps;
  Gateway gw(backend, recording(sleeps));
  try {
    gw.complete({"id", "p", "m", {}});
    FAIL();
  } catch (const HttpStatusError& e) {
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(backend->calls, 1);
  EXPECT_TRUE(sleeps.empty());
}

TEST(Gateway, TransportFailuresExhaustRetries) {
  std::deque<BackendReply> script(10, BackendReply{true, 0, "", "connection refused"});
  auto backend = std::make_shared<ScriptedBackend>(script);
  std::vector<std::chrono::milliseconds> sleeps;
  auto opts = recording(sleeps);
  opts.retry.initial_backoff = std::chrono::milliseconds(10000);
  opts.retry.max_backoff = std::chrono::milliseconds(25000);
  Gateway gw(backend, opts);
  EXPECT_THROW(gw.complete({"id", "p", "m", {}}), TransportError);
  EXPECT_EQ(backend->calls, 5);
  EXPECT_EQ(sleeps.back(), std::chrono::milliseconds(25000));
}

TEST(Gateway, BatchRespectsConcurrencyBound) {
  MockOptions o;
  o.latency = std::chrono::milliseconds(5);
  auto mock = std::make_shared<MockBackend>(o);
  GatewayOptions opts;
  opts.max_in_flight = 3;
  Gateway gw(mock, opts);
  std::vector<CompletionRequest> reqs;
  for (int i = 0; i < 24; ++i) reqs.push_back({"r" + std::to_string(i), prompt::judge_prompt("Q" + std::to_string(i), "A"), "m", {}});
  std::vector<int> seen(reqs.size(), 0);
  gw.complete_batch(reqs, [&](std::size_t i, const CompletionResult& r) {
    ++seen[i];
    EXPECT_EQ(r.request_id, reqs[i].request_id);
  });
  EXPECT_EQ(std::count(seen.begin(), seen.end(), 1), 24);
  EXPECT_LE(mock->stats().max_in_flight, 3u);
  EXPECT_GE(mock->stats().max_in_flight, 2u);
}

TEST(Gateway, BatchFailsFastWithLowestIndex) {
  MockOptions o;
  o.fail_after_calls = 4;
  auto mock = std::make_shared<MockBackend>(o);
  GatewayOptions opts;
  opts.max_in_flight = 1;
  opts.sleep = [](std::chrono::milliseconds) {};
  Gateway gw(mock, opts);
  std::vector<CompletionRequest> reqs;
  for (int i = 0; i < 10; ++i) reqs.push_back({"r" + std::to_string(i), prompt::judge_prompt("Q" + std::to_string(i), "A"), "m", {}});
  std::size_t delivered = 0;
  try {
    gw.complete_batch(reqs, [&](std::size_t, const CompletionResult&) { ++delivered; });
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("r4"), std::string::npos) << e.what();
  }
  EXPECT_EQ(delivered, 4u);
}

TEST(Gateway, CheckpointedRunSkipsCompletedKeys) {
  oracle::TempDir dir;
  auto mock = std::make_shared<MockBackend>();
  GatewayOptions opts;
  Gateway gw(mock, opts);
  auto key = [](std::size_t i) { return "k" + std::to_string(i); };
  auto make = [](std::size_t i) {
    return CompletionRequest{"r" + std::to_string(i), prompt::judge_prompt("Q" + std::to_string(i), "A"), "m", {}};
  };
  auto finish = [&](std::size_t i, const CompletionResult& r) {
    return nlohmann::json{{"key", key(i)}, {"text", r.text}};
  };
  std::vector<nlohmann::json> first;
  {
    util::Checkpoint cp(dir / "cp.jsonl", "key", false);
    first = run_checkpointed(gw, 6, key, make, finish, &cp);
  }
  const auto calls_before = mock->stats().calls;
  util::Checkpoint cp(dir / "cp.jsonl", "key", true);
  const auto second = run_checkpointed(gw, 8, key, make, finish, &cp);
  EXPECT_EQ(mock->stats().calls - calls_before, 2u);
  ASSERT_EQ(second.size(), 8u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(second[i], first[i]);
  EXPECT_EQ(second[7].at("key"), "k7");
}

TEST(HttpBackend, TalksToLocalServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  nlohmann::json seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 429;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = nlohmann::json::parse(req.body);
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"pong"}}]})", "application/json");
  });
  server.Post("/bad/chat/completions", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("GQA_TEST_KEY", "secret", 1);
  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  GatewayOptions opts;
  opts.sleep = [](std::chrono::milliseconds) {};
  {
    Gateway gw(std::make_shared<HttpBackend>(HttpBackendOptions{base + "/v1", "GQA_TEST_KEY", std::chrono::seconds(5)}),
               opts);
    const auto r = gw.complete({"id", "ping", "test-model", {0.6, 32}});
    EXPECT_EQ(r.text, "pong");
    EXPECT_EQ(r.retries, 2);
    EXPECT_EQ(seen_auth, "Bearer secret");
    EXPECT_EQ(seen_body.at("model"), "test-model");
    EXPECT_EQ(seen_body.at("max_tokens"), 32);
    EXPECT_EQ(seen_body.at("messages").at(0).at("content"), "ping");
  }
  {
    Gateway gw(std::make_shared<HttpBackend>(HttpBackendOptions{base + "/bad", "GQA_TEST_KEY", std::chrono::seconds(5)}),
               opts);
    EXPECT_THROW(gw.complete({"id", "ping", "m", {}}), HttpStatusError);
  }
  server.stop();
  t.join();

  opts.retry.max_retries = 1;
  Gateway down(std::make_shared<HttpBackend>(HttpBackendOptions{base + "/v1", "GQA_TEST_KEY", std::chrono::seconds(1)}),
               opts);
  EXPECT_THROW(down.complete({"id", "ping", "m", {}}), TransportError);
}
