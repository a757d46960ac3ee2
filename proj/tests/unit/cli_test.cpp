#include <gtest/gtest.h>

#include <cstdlib>

#include <spdlog/spdlog.h>

#include "app/config.hpp"
#include "app/stages.hpp"
#include "graphletqa/errors.hpp"
#include "graphletqa/llm/mock_backend.hpp"
#include "graphletqa/qa.hpp"
#include "graphletqa/util/io.hpp"
#include "oracles.hpp"

using namespace graphletqa;
namespace fs = std::filesystem;

namespace {

const fs::path kToy = GRAPHLETQA_TOY_DIR;
const std::string kCli = GRAPHLETQA_CLI;

app::RunContext toy(const fs::path& out) {
  app::Overrides ov;
  ov.out_dir = out;
  ov.mock_llm = true;
  return {app::load_config(kToy / "config.json", ov), false, nullptr};
}

nlohmann::json manifest(const app::PipelineConfig& c, const std::string& stage) {
  return nlohmann::json::parse(oracle::read_file(c.out_dir / "manifests" / (stage + ".json")));
}

int run_cli(const std::string& args) {
  const int rc = std::system((kCli + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

class Quiet : public ::testing::Environment {
  void SetUp() override { spdlog::set_level(spdlog::level::err); }
};
const auto* const kQuiet = ::testing::AddGlobalTestEnvironment(new Quiet);

}  // namespace

TEST(Config, ParsesToyConfig) {
  const auto c = app::load_config(kToy / "config.json");
  EXPECT_EQ(c.paths.nodes, kToy / "nodes.tsv");
  EXPECT_EQ(c.sampling.target, 4u);
  EXPECT_EQ(c.seed, 13u);
  EXPECT_EQ(c.sampling.seed, 13u);
  EXPECT_FALSE(c.llm.mock);
  EXPECT_DOUBLE_EQ(c.llm.decoding.temperature, 0.6);

  app::Overrides ov;
  ov.seed = 99;
  ov.mock_llm = true;
  ov.out_dir = "/tmp/x";
  const auto o = app::load_config(kToy / "config.json", ov);
  EXPECT_EQ(o.seed, 99u);
  EXPECT_EQ(o.sampling.seed, 99u);
  EXPECT_TRUE(o.llm.mock);
  EXPECT_EQ(o.out_dir, fs::path("/tmp/x"));
  EXPECT_FALSE(o.snapshot().contains("out_dir"));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto doc = nlohmann::json::parse(oracle::read_file(kToy / "config.json"));
  auto unknown = doc;
  unknown["sampling"]["tagret"] = 3;
  EXPECT_THROW(app::parse_config(unknown, kToy), ConfigError);
  auto bad = doc;
  bad["llm"]["temperature"] = "hot";
  EXPECT_THROW(app::parse_config(bad, kToy), ConfigError);
  auto range = doc;
  range["llm"]["mock_options"]["paraphrase"] = 2.0;
  EXPECT_THROW(app::parse_config(range, kToy), ConfigError);
  EXPECT_THROW(app::load_config(kToy / "missing.json"), PathError);
}

TEST(Stages, MissingEdgesFailsBeforeWork) {
  oracle::TempDir dir;
  auto ctx = toy(dir / "out");
  ctx.config.paths.edges = dir / "nope.tsv";
  try {
    app::cmd_prepare(ctx);
    FAIL();
  } catch (const PathError& e) {
    EXPECT_EQ(e.path(), dir / "nope.tsv");
  }
  EXPECT_FALSE(fs::exists(app::stage_dir(ctx.config, "prepare") / "nodes.tsv"));
}

TEST(Stages, StageNeedsItsPredecessor) {
  oracle::TempDir dir;
  EXPECT_THROW(app::cmd_generate(toy(dir / "out")), PathError);
  EXPECT_THROW(app::run_stage(toy(dir / "out"), "bogus"), ConfigError);
}

TEST(Stages, ResumeAfterInterruptedGeneration) {
  oracle::TempDir dir;
  auto ctx = toy(dir / "out");
  app::cmd_prepare(ctx);
  app::cmd_graphlets(ctx);

  auto broken = ctx.config.llm.mock_options;
  broken.fail_after_calls = 20;
  ctx.backend = std::make_shared<llm::MockBackend>(broken);
  ctx.config.llm.max_in_flight = 1;
  ctx.config.llm.retry.max_retries = 0;
  EXPECT_THROW(app::cmd_generate(ctx), TransportError);
  EXPECT_EQ(manifest(ctx.config, "generate").at("status"), "running");
  util::Checkpoint partial(app::stage_dir(ctx.config, "generate") / "generated.checkpoint.jsonl", "graphlet_id", true);
  EXPECT_EQ(partial.size(), 20u);

  auto healthy = std::make_shared<llm::MockBackend>(ctx.config.llm.mock_options);
  ctx.backend = healthy;
  ctx.resume = true;
  app::cmd_generate(ctx);
  const auto resumed = qa::read_records_jsonl(app::stage_dir(ctx.config, "generate") / "generated.jsonl");
  EXPECT_EQ(healthy->stats().calls, resumed.size() - 20);
  EXPECT_EQ(manifest(ctx.config, "generate").at("status"), "complete");

  oracle::TempDir fresh_dir;
  auto fresh = toy(fresh_dir / "out");
  app::cmd_prepare(fresh);
  app::cmd_graphlets(fresh);
  app::cmd_generate(fresh);
  EXPECT_EQ(oracle::read_file(app::stage_dir(fresh.config, "generate") / "generated.jsonl"),
            oracle::read_file(app::stage_dir(ctx.config, "generate") / "generated.jsonl"));
}

TEST(Stages, FullRunProducesReports) {
  oracle::TempDir dir;
  const auto ctx = toy(dir / "out");
  app::run_all(ctx);
  for (const char* f : {"prepare/degree_histogram.svg", "graphlets/census.tsv", "filter/funnel.tsv",
                        "retrieve/index/manifest.json", "rephrase/multiple_choice.jsonl", "stats/report.json",
                        "stats/shape_acceptance.svg", "stats/evidence_distribution.tsv"}) {
    EXPECT_TRUE(fs::exists(ctx.config.out_dir / f)) << f;
  }
  for (auto stage : app::kStages) EXPECT_EQ(manifest(ctx.config, std::string(stage)).at("status"), "complete");
  const auto report = nlohmann::json::parse(oracle::read_file(ctx.config.out_dir / "stats" / "report.json"));
  EXPECT_TRUE(report.contains("funnel"));
  const auto m = manifest(ctx.config, "filter");
  EXPECT_TRUE(m.contains("config"));
  EXPECT_FALSE(m.at("outputs").empty());
}

TEST(Stages, StatsWithoutCompletedStages) {
  oracle::TempDir dir;
  const auto ctx = toy(dir / "out");
  app::cmd_stats(ctx);
  const auto report = nlohmann::json::parse(oracle::read_file(ctx.config.out_dir / "stats" / "report.json"));
  EXPECT_TRUE(report.contains("notice"));
}

TEST(Prompts, ExportWritesCatalog) {
  oracle::TempDir dir;
  app::export_prompts(dir / "p");
  EXPECT_TRUE(fs::exists(dir / "p" / "manifest.json"));
}

TEST(Binary, ExitCodes) {
  oracle::TempDir dir;
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("--config " + (kToy / "config.json").string() + " --mock-llm --out-dir " +
                    (dir / "out").string() + " prepare"),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "prepare" / "nodes.tsv"));
  EXPECT_EQ(run_cli("--config " + (dir / "missing.json").string() + " prepare"), 1);
  EXPECT_NE(run_cli("no-such-command"), 0);
}
