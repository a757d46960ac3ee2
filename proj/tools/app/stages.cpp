#include "app/stages.hpp"

#include <map>
#include <spdlog/spdlog.h>

#include "app/manifest.hpp"
#include "app/plots.hpp"
#include "graphletqa/errors.hpp"
#include "graphletqa/evidence.hpp"
#include "graphletqa/kg.hpp"
#include "graphletqa/llm/mock_backend.hpp"
#include "graphletqa/prompt/catalog.hpp"
#include "graphletqa/qa.hpp"
#include "graphletqa/rephrase.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct LlmHandle {
  std::unique_ptr<llm::Gateway> gateway;
  std::shared_ptr<llm::MockBackend> mock;
};

LlmHandle make_gateway(const RunContext& ctx, const fs::path& dir) {
  const auto& c = ctx.config.llm;
  std::shared_ptr<llm::Backend> backend = ctx.backend;
  LlmHandle handle;
  if (!backend) {
    if (c.mock) {
      handle.mock = std::make_shared<llm::MockBackend>(c.mock_options);
      backend = handle.mock;
    } else {
      if (c.endpoint.empty()) throw ConfigError("llm.endpoint is not set; configure one or pass --mock-llm");
      backend = std::make_shared<llm::HttpBackend>(
          llm::HttpBackendOptions{.base_url = c.endpoint, .api_key_env = c.api_key_env, .timeout = c.timeout});
    }
  }
  const auto audit = dir / "llm_audit.jsonl";
  if (!ctx.resume) fs::remove(audit);
  handle.gateway = std::make_unique<llm::Gateway>(
      backend, llm::GatewayOptions{.retry = c.retry, .max_in_flight = c.max_in_flight, .audit_log = audit, .sleep = {}});
  return handle;
}

qa::LlmSettings llm_settings(const PipelineConfig& c) { return {c.llm.model, c.llm.decoding}; }

json mock_report(const LlmHandle& h) {
  if (!h.mock) return nullptr;
  const auto s = h.mock->stats();
  // max_in_flight is scheduling-dependent and stays out of the manifest.
  return {{"calls", s.calls},
          {"planted_generation_parse_failures", s.planted_generation_parse_failures},
          {"planted_role_violations", s.planted_role_violations},
          {"planted_judge_rejections", s.planted_judge_rejections},
          {"planted_judge_parse_failures", s.planted_judge_parse_failures},
          {"planted_paraphrases", s.planted_paraphrases},
          {"planted_rephrase_violations", s.planted_rephrase_violations}};
}

void require(const fs::path& p, const char* key) {
  if (p.empty()) throw ConfigError(std::string("config key paths.") + key + " is not set");
}

json histogram_json(const kg::DegreeHistogram& h) {
  return {{"nodes", h.node_count}, {"min_degree", h.min_degree}, {"max_degree", h.max_degree},
          {"mean_degree", h.mean_degree}};
}

std::vector<std::pair<double, double>> histogram_points(const kg::DegreeHistogram& h) {
  std::vector<std::pair<double, double>> out;
  for (auto [d, n] : h.buckets) out.emplace_back(static_cast<double>(d), static_cast<double>(n));
  return out;
}

std::map<std::size_t, std::size_t> read_histogram(const fs::path& path) {
  std::map<std::size_t, std::size_t> out;
  util::read_tsv(path, {"degree", "count"}, [&](const std::vector<std::string>& f, std::size_t line) {
    try {
      out[std::stoull(f[0])] = std::stoull(f[1]);
    } catch (const std::exception&) {
      throw ParseError(path, line, "expected two integers");
    }
  });
  return out;
}

bool stage_complete(const PipelineConfig& c, std::string_view stage) {
  const auto p = c.out_dir / "manifests" / (std::string(stage) + ".json");
  if (!fs::exists(p)) return false;
  auto doc = json::parse(util::read_text_file(p), nullptr, false);
  return !doc.is_discarded() && doc.value("status", "") == "complete";
}

void write_output(StageManifest& manifest, const fs::path& path, std::string_view contents) {
  util::write_text_file(path, contents);
  manifest.add_output(path);
}

}  // namespace

fs::path stage_dir(const PipelineConfig& config, std::string_view stage) { return config.out_dir / stage; }

void cmd_prepare(const RunContext& ctx) {
  const auto& c = ctx.config;
  require(c.paths.nodes, "nodes");
  require(c.paths.edges, "edges");
  StageManifest manifest(c, "prepare", {c.paths.nodes, c.paths.edges, c.paths.names});
  const auto dir = stage_dir(c, "prepare");

  const auto raw = kg::load_graph(c.paths.nodes, c.paths.edges);
  const auto names = c.paths.names.empty() ? kg::NameMap{} : kg::load_name_map(c.paths.names);
  const auto hydrated = kg::apply_hydration(raw, names);
  const auto simple = kg::simplify(hydrated.graph);
  const auto before = kg::degree_histogram(simple);
  const auto reduced = kg::reduce_by_degree(simple, c.min_degree, c.max_degree);
  const auto after = kg::degree_histogram(reduced);
  spdlog::info("prepare: {} nodes / {} edges loaded, {} / {} after reduction", raw.node_count(), raw.edge_count(),
               reduced.node_count(), reduced.edge_count());

  kg::write_graph(reduced, dir / "nodes.tsv", dir / "edges.tsv");
  manifest.add_output(dir / "nodes.tsv");
  manifest.add_output(dir / "edges.tsv");
  write_output(manifest, dir / "degree_before.tsv", kg::histogram_tsv(before));
  write_output(manifest, dir / "degree_after.tsv", kg::histogram_tsv(after));
  write_output(manifest, dir / "degree_histogram.svg",
               loglog_svg("Node degree distribution", "degree", "nodes",
                          {{"before reduction", "#c0504d", histogram_points(before)},
                           {"after reduction", "#4878a8", histogram_points(after)}}));

  const auto& r = hydrated.report;
  const json report = {
      {"input", {{"nodes", raw.node_count()}, {"edges", raw.edge_count()}}},
      {"simplified", {{"nodes", simple.node_count()}, {"edges", simple.edge_count()}}},
      {"reduced", {{"nodes", reduced.node_count()}, {"edges", reduced.edge_count()}}},
      {"degree_thresholds", {{"min", c.min_degree}, {"max", c.max_degree}}},
      {"degree_before", histogram_json(before)},
      {"degree_after", histogram_json(after)},
      {"hydration",
       {{"total_nodes", r.total_nodes},
        {"resolved", r.resolved},
        {"resolved_fraction", r.resolved_fraction},
        {"named_nodes", r.named_nodes},
        {"unique_names", r.unique_names},
        {"unresolved_ids", r.unresolved_ids},
        {"unnamed_ids", r.unnamed_ids}}},
      {"reduced_checksum", reduced.checksum()},
  };
  write_output(manifest, dir / "report.json", report.dump(2) + "\n");
  manifest.set("graph", report["reduced"]);
  manifest.complete();
}

void cmd_graphlets(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto in = stage_dir(c, "prepare");
  StageManifest manifest(c, "graphlets", {in / "nodes.tsv", in / "edges.tsv"});
  const auto dir = stage_dir(c, "graphlets");

  const auto graph = kg::simplify(kg::load_graph(in / "nodes.tsv", in / "edges.tsv"));
  const auto set = graphlet::sample_per_shape(graph, c.sampling);
  spdlog::info("graphlets: {} sampled from {} nodes", set.graphlets.size(), graph.node_count());

  graphlet::write_graphlets_jsonl(dir / "graphlets.jsonl", set.graphlets);
  manifest.add_output(dir / "graphlets.jsonl");
  write_output(manifest, dir / "census.tsv", graphlet::census_tsv(set.census));
  const auto sampling = graphlet::sampling_manifest(set, c.sampling);
  write_output(manifest, dir / "sampling.json", sampling.dump(2) + "\n");
  manifest.set("sampling", sampling);
  manifest.complete();
}

void cmd_generate(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto graphlets_path = stage_dir(c, "graphlets") / "graphlets.jsonl";
  std::vector<fs::path> inputs{graphlets_path};
  if (!c.paths.prompt_catalog.empty()) inputs.push_back(c.paths.prompt_catalog / "manifest.json");
  StageManifest manifest(c, "generate", inputs);
  const auto dir = stage_dir(c, "generate");

  const auto catalog =
      c.paths.prompt_catalog.empty() ? prompt::PromptCatalog::builtin() : prompt::PromptCatalog::load(c.paths.prompt_catalog);
  const auto& config = catalog.config(c.prompt_config);
  const auto graphlets = graphlet::read_graphlets_jsonl(graphlets_path);

  auto llm = make_gateway(ctx, dir);
  util::Checkpoint checkpoint(dir / "generated.checkpoint.jsonl", "graphlet_id", ctx.resume);
  const auto records = qa::generate_all(*llm.gateway, catalog, config, graphlets, llm_settings(c), &checkpoint);

  qa::write_records_jsonl(dir / "generated.jsonl", records);
  manifest.add_output(dir / "generated.jsonl");
  manifest.set("prompt_config", {{"config_id", config.config_id}, {"modules", config.modules}});
  manifest.set("decoding", {{"temperature", c.llm.decoding.temperature}, {"max_tokens", c.llm.decoding.max_tokens}});
  manifest.set("mock", mock_report(llm));
  manifest.complete();
}

void cmd_filter(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto generated_path = stage_dir(c, "generate") / "generated.jsonl";
  StageManifest manifest(c, "filter", {generated_path});
  const auto dir = stage_dir(c, "filter");

  const auto generated = qa::read_records_jsonl(generated_path);
  const auto structural = qa::structural_filter(generated);
  const auto bounds = qa::compute_length_bounds(structural.kept, c.z);
  const auto lengths = qa::length_filter(structural.kept, bounds);

  auto llm = make_gateway(ctx, dir);
  util::Checkpoint checkpoint(dir / "judge.checkpoint.jsonl", "graphlet_id", ctx.resume);
  const auto judged = qa::judge_all(*llm.gateway, lengths.kept, llm_settings(c), &checkpoint);

  std::map<std::string, const qa::QARecord*, std::less<>> final_status;
  for (const auto* group : {&structural.removed, &lengths.removed, &judged}) {
    for (const auto& r : *group) final_status[r.graphlet_id] = &r;
  }
  std::vector<qa::QARecord> filtered;
  std::vector<qa::QARecord> accepted;
  for (const auto& r : generated) {
    const auto& done = *final_status.at(r.graphlet_id);
    filtered.push_back(done);
    if (done.status == qa::Status::accepted) accepted.push_back(done);
  }
  const auto report = qa::stage_stats(filtered);
  spdlog::info("filter: {} generated, {} accepted", report.funnel.generated, report.funnel.accepted);

  qa::write_records_jsonl(dir / "filtered.jsonl", filtered);
  manifest.add_output(dir / "filtered.jsonl");
  qa::write_records_jsonl(dir / "accepted.jsonl", accepted);
  manifest.add_output(dir / "accepted.jsonl");
  write_output(manifest, dir / "bounds.json", qa::to_json(bounds).dump(2) + "\n");
  write_output(manifest, dir / "funnel.tsv", qa::funnel_tsv(report.funnel));
  const auto& f = report.funnel;
  manifest.set("funnel", {{"generated", f.generated},
                          {"parse_failed", f.parse_failed},
                          {"length_culled", f.length_culled},
                          {"judge_rejected", f.judge_rejected},
                          {"judge_parse_failed", f.judge_parse_failed},
                          {"accepted", f.accepted}});
  manifest.set("mock", mock_report(llm));
  manifest.complete();
}

void cmd_retrieve(const RunContext& ctx) {
  const auto& c = ctx.config;
  require(c.paths.corpus, "corpus");
  const auto accepted_path = stage_dir(c, "filter") / "accepted.jsonl";
  StageManifest manifest(c, "retrieve", {c.paths.corpus, accepted_path});
  const auto dir = stage_dir(c, "retrieve");

  const auto corpus = evidence::load_corpus(c.paths.corpus);
  const auto index = evidence::build_index(corpus, c.bm25);
  index.save(dir / "index");
  for (const char* f : {"postings.bin", "lengths.bin", "manifest.json"}) manifest.add_output(dir / "index" / f);
  const auto accepted = qa::read_records_jsonl(accepted_path);

  auto llm = make_gateway(ctx, dir);
  util::Checkpoint checkpoint(dir / "evidence.checkpoint.jsonl", "key", ctx.resume);
  const auto bundles =
      evidence::collect_evidence(*llm.gateway, index, corpus, accepted, c.retrieval_k, llm_settings(c), &checkpoint);
  const auto stats = evidence::bundle_stats(bundles);
  spdlog::info("retrieve: {} bundles over {} documents, {:.1f}% with at least two relevant", bundles.size(),
               index.size(), 100.0 * stats.at_least_two_fraction);

  evidence::write_bundles_jsonl(dir / "evidence.jsonl", bundles);
  manifest.add_output(dir / "evidence.jsonl");
  write_output(manifest, dir / "evidence_stats.tsv", evidence::bundle_stats_tsv(stats));
  manifest.set("index", index.manifest());
  manifest.set("mock", mock_report(llm));
  manifest.complete();
}

void cmd_rephrase(const RunContext& ctx) {
  const auto& c = ctx.config;
  const auto accepted_path = stage_dir(c, "filter") / "accepted.jsonl";
  const auto evidence_path = stage_dir(c, "retrieve") / "evidence.jsonl";
  StageManifest manifest(c, "rephrase",
                         {accepted_path, evidence_path, c.paths.yes_no_examples, c.paths.mcq_examples});
  const auto dir = stage_dir(c, "rephrase");

  const auto accepted = qa::read_records_jsonl(accepted_path);
  std::map<std::string, evidence::EvidenceBundle, std::less<>> by_qa;
  for (auto& b : evidence::read_bundles_jsonl(evidence_path)) by_qa.emplace(b.qa_id, std::move(b));

  std::vector<qa::QARecord> records;
  std::vector<evidence::EvidenceBundle> bundles;
  for (auto i : rephrase::select_subset(accepted.size(), c.rephrase_sample_size, c.seed)) {
    const auto it = by_qa.find(accepted[i].graphlet_id);
    if (it == by_qa.end()) {
      throw ConfigError("no evidence bundle for accepted pair " + accepted[i].graphlet_id + "; rerun retrieve");
    }
    records.push_back(accepted[i]);
    bundles.push_back(it->second);
  }

  auto llm = make_gateway(ctx, dir);
  std::string summary = "format\tattempted\twritten\tfailed\n";
  std::string failures = "qa_id\tformat\tviolation\n";
  json formats = json::object();
  for (auto [format, path] : {std::pair{rephrase::FormatId::yes_no, c.paths.yes_no_examples},
                              std::pair{rephrase::FormatId::multiple_choice, c.paths.mcq_examples}}) {
    if (path.empty()) continue;
    const auto name = std::string(rephrase::to_string(format));
    const auto set = rephrase::index_examples(path, format);
    util::Checkpoint checkpoint(dir / (name + ".checkpoint.jsonl"), "qa_id", ctx.resume);
    const auto outcomes =
        rephrase::rephrase_all(*llm.gateway, records, bundles, set, c.n_examples, llm_settings(c), &checkpoint);
    std::string out;
    std::size_t written = 0;
    for (const auto& o : outcomes) {
      if (!o.record) continue;
      if (!rephrase::validate_format(*o.record).empty()) {
        throw Error("internal: invalid rephrased record for " + o.qa_id + " reached output");
      }
      out += util::dump_line(rephrase::to_json(*o.record)) + "\n";
      ++written;
    }
    write_output(manifest, dir / (name + ".jsonl"), out);
    const auto tsv = rephrase::failures_tsv(outcomes, format);
    failures += tsv.substr(tsv.find('\n') + 1);
    summary += name + "\t" + std::to_string(outcomes.size()) + "\t" + std::to_string(written) + "\t" +
               std::to_string(outcomes.size() - written) + "\n";
    formats[name] = {{"exemplars", set.exemplars.size()}, {"exemplar_index_checksum", set.index.checksum()}};
    spdlog::info("rephrase {}: {} of {} written", name, written, outcomes.size());
  }
  if (formats.empty()) spdlog::warn("rephrase: no target datasets configured");
  write_output(manifest, dir / "failures.tsv", failures);
  write_output(manifest, dir / "summary.tsv", summary);
  manifest.set("formats", formats);
  manifest.set("subset", {{"sample_size", c.rephrase_sample_size}, {"selected", records.size()}});
  manifest.set("mock", mock_report(llm));
  manifest.complete();
}

void cmd_stats(const RunContext& ctx) {
  const auto& c = ctx.config;
  StageManifest manifest(c, "stats", {});
  const auto dir = stage_dir(c, "stats");
  json report = json::object();

  if (stage_complete(c, "prepare")) {
    const auto before = read_histogram(stage_dir(c, "prepare") / "degree_before.tsv");
    const auto after = read_histogram(stage_dir(c, "prepare") / "degree_after.tsv");
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> merged;
    for (auto [d, n] : before) merged[d].first = n;
    for (auto [d, n] : after) merged[d].second = n;
    std::string tsv = "degree\tbefore\tafter\n";
    for (auto [d, counts] : merged) {
      tsv += std::to_string(d) + "\t" + std::to_string(counts.first) + "\t" + std::to_string(counts.second) + "\n";
    }
    write_output(manifest, dir / "degree_histogram.tsv", tsv);
    auto points = [](const std::map<std::size_t, std::size_t>& h) {
      std::vector<std::pair<double, double>> out;
      for (auto [d, n] : h) out.emplace_back(static_cast<double>(d), static_cast<double>(n));
      return out;
    };
    write_output(manifest, dir / "degree_histogram.svg",
                 loglog_svg("Node degree distribution", "degree", "nodes",
                            {{"before reduction", "#c0504d", points(before)},
                             {"after reduction", "#4878a8", points(after)}}));
    report["degree"] = {{"distinct_degrees_before", before.size()}, {"distinct_degrees_after", after.size()}};
  }

  const auto filtered = stage_dir(c, "filter") / "filtered.jsonl";
  const auto generated = stage_dir(c, "generate") / "generated.jsonl";
  std::optional<fs::path> records_path;
  if (stage_complete(c, "filter")) {
    records_path = filtered;
  } else if (stage_complete(c, "generate")) {
    records_path = generated;
  }
  if (records_path) {
    const auto records = qa::read_records_jsonl(*records_path);
    const auto s = qa::stage_stats(records);
    write_output(manifest, dir / "funnel.tsv", qa::funnel_tsv(s.funnel));
    write_output(manifest, dir / "shape_acceptance.tsv", qa::shape_acceptance_tsv(s.shapes));
    std::vector<std::string> labels;
    std::vector<double> ratios;
    json shapes = json::array();
    for (const auto& sh : s.shapes) {
      labels.push_back(std::to_string(sh.shape_ordinal));
      ratios.push_back(sh.ratio());
      shapes.push_back({{"shape_ordinal", sh.shape_ordinal},
                        {"generated", sh.generated},
                        {"accepted", sh.accepted},
                        {"acceptance_ratio", sh.ratio()}});
    }
    write_output(manifest, dir / "shape_acceptance.svg",
                 bar_chart_svg("Acceptance ratio per graphlet shape", "shape", "accepted / generated", labels, ratios));
    const auto& f = s.funnel;
    report["funnel"] = {{"generated", f.generated},       {"parse_failed", f.parse_failed},
                        {"length_culled", f.length_culled}, {"judge_rejected", f.judge_rejected},
                        {"judge_parse_failed", f.judge_parse_failed}, {"accepted", f.accepted},
                        {"pending", s.pending}};
    report["shapes"] = shapes;
  }

  if (stage_complete(c, "retrieve")) {
    const auto bundles = evidence::read_bundles_jsonl(stage_dir(c, "retrieve") / "evidence.jsonl");
    const auto s = evidence::bundle_stats(bundles);
    std::string tsv = "relevant_documents\tqa_pairs\n";
    std::vector<std::string> labels;
    std::vector<double> counts;
    for (auto [k, n] : s.distribution) {
      tsv += std::to_string(k) + "\t" + std::to_string(n) + "\n";
      labels.push_back(std::to_string(k));
      counts.push_back(static_cast<double>(n));
    }
    write_output(manifest, dir / "evidence_distribution.tsv", tsv);
    write_output(manifest, dir / "evidence_distribution.svg",
                 bar_chart_svg("Relevant documents per QA pair", "relevant documents", "QA pairs", labels, counts));
    report["evidence"] = {{"bundles", s.bundles},
                          {"zero_fraction", s.zero_fraction},
                          {"at_least_two_fraction", s.at_least_two_fraction},
                          {"at_least_five_fraction", s.at_least_five_fraction},
                          {"dropped_snippets", s.dropped_snippets},
                          {"downgraded", s.downgraded}};
  }

  if (stage_complete(c, "rephrase")) {
    json rows = json::array();
    util::read_tsv(stage_dir(c, "rephrase") / "summary.tsv", {"format", "attempted", "written", "failed"},
                   [&](const std::vector<std::string>& f, std::size_t) {
                     rows.push_back({{"format", f[0]},
                                     {"attempted", std::stoull(f[1])},
                                     {"written", std::stoull(f[2])},
                                     {"failed", std::stoull(f[3])}});
                   });
    report["rephrase"] = rows;
  }

  if (report.empty()) {
    spdlog::warn("stats: no completed stages under {}", c.out_dir.string());
    report["notice"] = "no completed stages";
  }
  write_output(manifest, dir / "report.json", report.dump(2) + "\n");
  manifest.complete();
}

void run_stage(const RunContext& ctx, std::string_view stage) {
  if (stage == "prepare") return cmd_prepare(ctx);
  if (stage == "graphlets") return cmd_graphlets(ctx);
  if (stage == "generate") return cmd_generate(ctx);
  if (stage == "filter") return cmd_filter(ctx);
  if (stage == "retrieve") return cmd_retrieve(ctx);
  if (stage == "rephrase") return cmd_rephrase(ctx);
  if (stage == "stats") return cmd_stats(ctx);
  throw ConfigError("unknown stage '" + std::string(stage) + "'");
}

void run_all(const RunContext& ctx) {
  const auto& p = ctx.config.paths;
  for (auto stage : kStages) {
    if (stage == "retrieve" && p.corpus.empty()) {
      spdlog::warn("skipping retrieve: paths.corpus is not set");
      continue;
    }
    if (stage == "rephrase" && (p.corpus.empty() || (p.yes_no_examples.empty() && p.mcq_examples.empty()))) {
      spdlog::warn("skipping rephrase: no corpus or target datasets configured");
      continue;
    }
    spdlog::info("stage {}", stage);
    run_stage(ctx, stage);
  }
}

void export_prompts(const fs::path& dir) { prompt::PromptCatalog::builtin().save(dir); }

}  // namespace graphletqa::app
