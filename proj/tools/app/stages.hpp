#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "app/config.hpp"
#include "graphletqa/llm/gateway.hpp"

namespace graphletqa::app {

struct RunContext {
  PipelineConfig config;
  /// Continue from checkpoints instead of starting LLM stages afresh.
  bool resume = false;
  /// Replaces the configured backend when set (tests).
  std::shared_ptr<llm::Backend> backend;
};

inline constexpr std::string_view kStages[] = {"prepare", "graphlets", "generate", "filter",
                                               "retrieve", "rephrase", "stats"};

std::filesystem::path stage_dir(const PipelineConfig& config, std::string_view stage);

void cmd_prepare(const RunContext& ctx);
void cmd_graphlets(const RunContext& ctx);
void cmd_generate(const RunContext& ctx);
void cmd_filter(const RunContext& ctx);
void cmd_retrieve(const RunContext& ctx);
void cmd_rephrase(const RunContext& ctx);
void cmd_stats(const RunContext& ctx);

/// Dispatches on a name from kStages. Throws ConfigError for unknown names.
void run_stage(const RunContext& ctx, std::string_view stage);

/// Every stage in order. retrieve and rephrase are skipped with a warning
/// when their inputs are not configured.
void run_all(const RunContext& ctx);

/// Writes the built-in prompt catalog to `dir` for inspection or editing.
void export_prompts(const std::filesystem::path& dir);

}  // namespace graphletqa::app
