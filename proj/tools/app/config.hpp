#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "graphletqa/evidence.hpp"
#include "graphletqa/graphlet/sampling.hpp"
#include "graphletqa/llm/gateway.hpp"
#include "graphletqa/llm/mock_backend.hpp"

namespace graphletqa::app {

struct InputPaths {
  std::filesystem::path nodes;
  std::filesystem::path edges;
  std::filesystem::path names;  // optional
  std::filesystem::path corpus;
  std::filesystem::path yes_no_examples;
  std::filesystem::path mcq_examples;
  std::filesystem::path prompt_catalog;  // optional; built-in catalog otherwise
};

struct LlmConfig {
  std::string endpoint;
  std::string model = "mock";
  std::string api_key_env = "OPENAI_API_KEY";
  llm::DecodingParams decoding;
  std::size_t max_in_flight = 4;
  llm::RetryPolicy retry;
  std::chrono::seconds timeout{120};
  bool mock = false;
  llm::MockOptions mock_options;
};

struct PipelineConfig {
  InputPaths paths;
  std::filesystem::path out_dir;
  std::size_t min_degree = 3;
  std::size_t max_degree = 100;
  graphlet::SamplingPlan sampling;
  std::string prompt_config = "full";
  LlmConfig llm;
  std::uint64_t seed = 0;
  double z = 3.0;
  std::size_t retrieval_k = 10;
  evidence::Bm25Params bm25;
  std::size_t n_examples = 3;
  /// 0 rephrases every accepted pair.
  std::size_t rephrase_sample_size = 0;

  /// Effective settings, without the output directory; stamped into manifests.
  nlohmann::json snapshot() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  bool mock_llm = false;
};

/// Reads a JSON config. Relative paths resolve against the config file's
/// directory. Unknown keys are rejected. Throws ConfigError / PathError.
PipelineConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Same, from an already parsed document.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                            const Overrides& overrides = {});

}  // namespace graphletqa::app
