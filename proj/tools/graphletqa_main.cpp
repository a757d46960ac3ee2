#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <spdlog/spdlog.h>

#include "app/stages.hpp"
#include "graphletqa/errors.hpp"
#include "graphletqa/version.hpp"

namespace fs = std::filesystem;
using namespace graphletqa;

int main(int argc, char** argv) {
  CLI::App cli{"Graphlet-anchored QA dataset generation pipeline", "graphletqa"};
  cli.set_version_flag("--version", std::string(kVersion));
  cli.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool resume = false;
  bool mock = false;
  std::string out_dir;
  std::string log_level = "info";
  cli.add_option("--config", config_path, "Pipeline config (JSON)");
  auto* seed_opt = cli.add_option("--seed", seed, "Override the config seed");
  cli.add_flag("--resume", resume, "Continue LLM stages from their checkpoints");
  cli.add_flag("--mock-llm", mock, "Use the deterministic mock backend instead of an endpoint");
  cli.add_option("--out-dir", out_dir, "Override paths.out_dir");
  cli.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  std::vector<std::pair<std::string, CLI::App*>> stages;
  for (auto stage : app::kStages) {
    static const std::map<std::string_view, std::string> help = {
        {"prepare", "Load, hydrate, simplify and degree-filter the knowledge graph"},
        {"graphlets", "Sample graphlets per shape from the reduced graph"},
        {"generate", "Generate one QA pair per graphlet"},
        {"filter", "Structural, length and judge filters"},
        {"retrieve", "BM25 retrieval and evidence assessment for accepted pairs"},
        {"rephrase", "Rewrite accepted pairs into yes/no and multiple-choice formats"},
        {"stats", "Consolidated funnel, acceptance, evidence and degree reports"},
    };
    stages.emplace_back(std::string(stage), cli.add_subcommand(std::string(stage), help.at(stage)));
  }
  auto* all = cli.add_subcommand("all", "Run every stage in order");
  auto* prompts = cli.add_subcommand("prompts", "Prompt catalog utilities");
  prompts->require_subcommand(1);
  std::string export_dir;
  auto* prompts_export = prompts->add_subcommand("export", "Write the built-in catalog to a directory");
  prompts_export->add_option("dir", export_dir, "Target directory")->required();

  CLI11_PARSE(cli, argc, argv);

  spdlog::set_level(spdlog::level::from_str(log_level));
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  std::string current = "prompts";
  try {
    if (prompts_export->parsed()) {
      app::export_prompts(export_dir);
      return 0;
    }
    if (config_path.empty()) throw ConfigError("--config is required");
    app::Overrides overrides;
    if (*seed_opt) overrides.seed = seed;
    if (!out_dir.empty()) overrides.out_dir = fs::path(out_dir);
    overrides.mock_llm = mock;
    app::RunContext ctx{app::load_config(config_path, overrides), resume, nullptr};

    if (all->parsed()) {
      current = "all";
      app::run_all(ctx);
      return 0;
    }
    for (const auto& [name, sub] : stages) {
      if (sub->parsed()) {
        current = name;
        app::run_stage(ctx, name);
      }
    }
  } catch (const Error& e) {
    std::cerr << "graphletqa " << current << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "graphletqa " << current << ": unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
