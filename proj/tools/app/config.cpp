#include "app/config.hpp"

#include <set>

#include "graphletqa/errors.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::app {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string_view> allowed(keys);
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

fs::path resolve(const json& obj, const char* key, const fs::path& base) {
  std::string raw;
  read(obj, key, raw, "paths");
  if (raw.empty()) return {};
  fs::path p(raw);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

PipelineConfig parse_config(const json& doc, const fs::path& base_dir, const Overrides& overrides) {
  allow_keys(doc, "config",
             {"paths", "degree", "sampling", "prompt_config", "llm", "seed", "z", "retrieval_k", "bm25", "rephrase"});
  PipelineConfig c;

  const json paths = doc.value("paths", json::object());
  allow_keys(paths, "paths",
             {"nodes", "edges", "names", "corpus", "yes_no_examples", "mcq_examples", "prompt_catalog", "out_dir"});
  c.paths.nodes = resolve(paths, "nodes", base_dir);
  c.paths.edges = resolve(paths, "edges", base_dir);
  c.paths.names = resolve(paths, "names", base_dir);
  c.paths.corpus = resolve(paths, "corpus", base_dir);
  c.paths.yes_no_examples = resolve(paths, "yes_no_examples", base_dir);
  c.paths.mcq_examples = resolve(paths, "mcq_examples", base_dir);
  c.paths.prompt_catalog = resolve(paths, "prompt_catalog", base_dir);
  c.out_dir = resolve(paths, "out_dir", base_dir);

  read(doc, "seed", c.seed, "config");
  read(doc, "z", c.z, "config");
  read(doc, "retrieval_k", c.retrieval_k, "config");
  read(doc, "prompt_config", c.prompt_config, "config");

  const json degree = doc.value("degree", json::object());
  allow_keys(degree, "degree", {"min", "max"});
  read(degree, "min", c.min_degree, "degree");
  read(degree, "max", c.max_degree, "degree");

  const json sampling = doc.value("sampling", json::object());
  allow_keys(sampling, "sampling", {"target", "sizes", "depth_probabilities", "pilot_probability", "oversample", "threads"});
  read(sampling, "target", c.sampling.target, "sampling");
  read(sampling, "sizes", c.sampling.sizes, "sampling");
  read(sampling, "pilot_probability", c.sampling.pilot_probability, "sampling");
  read(sampling, "oversample", c.sampling.oversample, "sampling");
  read(sampling, "threads", c.sampling.threads, "sampling");
  if (auto it = sampling.find("depth_probabilities"); it != sampling.end()) {
    if (!it->is_object()) throw ConfigError("sampling.depth_probabilities must map sizes to lists");
    for (const auto& [size, probs] : it->items()) {
      try {
        c.sampling.depth_probabilities[std::stoi(size)] = probs.get<std::vector<double>>();
      } catch (const std::exception&) {
        throw ConfigError("sampling.depth_probabilities." + size + " must be a list of numbers");
      }
    }
  }

  const json llm_doc = doc.value("llm", json::object());
  allow_keys(llm_doc, "llm",
             {"endpoint", "model", "api_key_env", "temperature", "max_tokens", "max_in_flight", "max_retries",
              "initial_backoff_ms", "max_backoff_ms", "timeout_s", "mock", "mock_options"});
  read(llm_doc, "endpoint", c.llm.endpoint, "llm");
  read(llm_doc, "model", c.llm.model, "llm");
  read(llm_doc, "api_key_env", c.llm.api_key_env, "llm");
  read(llm_doc, "temperature", c.llm.decoding.temperature, "llm");
  read(llm_doc, "max_tokens", c.llm.decoding.max_tokens, "llm");
  read(llm_doc, "max_in_flight", c.llm.max_in_flight, "llm");
  read(llm_doc, "max_retries", c.llm.retry.max_retries, "llm");
  read(llm_doc, "mock", c.llm.mock, "llm");
  std::int64_t ms = c.llm.retry.initial_backoff.count();
  read(llm_doc, "initial_backoff_ms", ms, "llm");
  c.llm.retry.initial_backoff = std::chrono::milliseconds(ms);
  ms = c.llm.retry.max_backoff.count();
  read(llm_doc, "max_backoff_ms", ms, "llm");
  c.llm.retry.max_backoff = std::chrono::milliseconds(ms);
  std::int64_t secs = c.llm.timeout.count();
  read(llm_doc, "timeout_s", secs, "llm");
  c.llm.timeout = std::chrono::seconds(secs);

  const json mock = llm_doc.value("mock_options", json::object());
  allow_keys(mock, "llm.mock_options",
             {"generation_parse_failure", "role_violation", "judge_rejection", "judge_parse_failure",
              "evidence_relevance", "paraphrase", "rephrase_violation", "latency_ms", "fail_after_calls"});
  auto& m = c.llm.mock_options;
  read(mock, "generation_parse_failure", m.generation_parse_failure, "llm.mock_options");
  read(mock, "role_violation", m.role_violation, "llm.mock_options");
  read(mock, "judge_rejection", m.judge_rejection, "llm.mock_options");
  read(mock, "judge_parse_failure", m.judge_parse_failure, "llm.mock_options");
  read(mock, "evidence_relevance", m.evidence_relevance, "llm.mock_options");
  read(mock, "paraphrase", m.paraphrase, "llm.mock_options");
  read(mock, "rephrase_violation", m.rephrase_violation, "llm.mock_options");
  read(mock, "fail_after_calls", m.fail_after_calls, "llm.mock_options");
  std::int64_t latency = 0;
  read(mock, "latency_ms", latency, "llm.mock_options");
  m.latency = std::chrono::milliseconds(latency);

  const json bm25 = doc.value("bm25", json::object());
  allow_keys(bm25, "bm25", {"k1", "b"});
  read(bm25, "k1", c.bm25.k1, "bm25");
  read(bm25, "b", c.bm25.b, "bm25");

  const json rephrase = doc.value("rephrase", json::object());
  allow_keys(rephrase, "rephrase", {"n_examples", "sample_size"});
  read(rephrase, "n_examples", c.n_examples, "rephrase");
  read(rephrase, "sample_size", c.rephrase_sample_size, "rephrase");

  if (overrides.seed) c.seed = *overrides.seed;
  if (overrides.out_dir) c.out_dir = *overrides.out_dir;
  if (overrides.mock_llm) c.llm.mock = true;
  c.sampling.seed = c.seed;

  if (c.out_dir.empty()) throw ConfigError("no output directory: set paths.out_dir or pass --out-dir");
  if (c.min_degree > c.max_degree) throw ConfigError("degree.min exceeds degree.max");
  if (!(c.z > 0.0)) throw ConfigError("z must be positive");
  if (c.retrieval_k == 0) throw ConfigError("retrieval_k must be at least 1");
  if (c.llm.max_in_flight == 0) throw ConfigError("llm.max_in_flight must be at least 1");
  if (c.llm.retry.max_retries < 0) throw ConfigError("llm.max_retries must be non-negative");
  if (c.llm.decoding.max_tokens <= 0) throw ConfigError("llm.max_tokens must be positive");
  for (double rate : {m.generation_parse_failure, m.role_violation, m.judge_rejection, m.judge_parse_failure,
                      m.evidence_relevance, m.paraphrase, m.rephrase_violation}) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("llm.mock_options rates must lie in [0, 1]");
  }
  if (latency < 0) throw ConfigError("llm.mock_options.latency_ms must be non-negative");
  c.sampling.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path, const Overrides& overrides) {
  const auto text = util::read_text_file(path);
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return parse_config(doc, fs::absolute(path).parent_path(), overrides);
}

json PipelineConfig::snapshot() const {
  auto rel = [](const fs::path& p) { return p.empty() ? std::string() : p.filename().string(); };
  json probs = json::object();
  for (const auto& [size, p] : sampling.depth_probabilities) probs[std::to_string(size)] = p;
  return {
      {"inputs",
       {{"nodes", rel(paths.nodes)},
        {"edges", rel(paths.edges)},
        {"names", rel(paths.names)},
        {"corpus", rel(paths.corpus)},
        {"yes_no_examples", rel(paths.yes_no_examples)},
        {"mcq_examples", rel(paths.mcq_examples)},
        {"prompt_catalog", rel(paths.prompt_catalog)}}},
      {"degree", {{"min", min_degree}, {"max", max_degree}}},
      {"sampling",
       {{"target", sampling.target},
        {"sizes", sampling.sizes},
        {"depth_probabilities", probs},
        {"pilot_probability", sampling.pilot_probability},
        {"oversample", sampling.oversample},
        {"threads", sampling.threads}}},
      {"prompt_config", prompt_config},
      {"llm",
       {{"backend", llm.mock ? "mock" : "http"},
        {"endpoint", llm.mock ? std::string() : llm.endpoint},
        {"model", llm.model},
        {"temperature", llm.decoding.temperature},
        {"max_tokens", llm.decoding.max_tokens},
        {"max_in_flight", llm.max_in_flight},
        {"max_retries", llm.retry.max_retries},
        {"initial_backoff_ms", llm.retry.initial_backoff.count()},
        {"max_backoff_ms", llm.retry.max_backoff.count()}}},
      {"mock_options",
       llm.mock ? json{{"generation_parse_failure", llm.mock_options.generation_parse_failure},
                       {"role_violation", llm.mock_options.role_violation},
                       {"judge_rejection", llm.mock_options.judge_rejection},
                       {"judge_parse_failure", llm.mock_options.judge_parse_failure},
                       {"evidence_relevance", llm.mock_options.evidence_relevance},
                       {"paraphrase", llm.mock_options.paraphrase},
                       {"rephrase_violation", llm.mock_options.rephrase_violation}}
                : json(nullptr)},
      {"seed", seed},
      {"z", z},
      {"retrieval_k", retrieval_k},
      {"bm25", {{"k1", bm25.k1}, {"b", bm25.b}}},
      {"rephrase", {{"n_examples", n_examples}, {"sample_size", rephrase_sample_size}}},
  };
}

}  // namespace graphletqa::app
