#include <algorithm>
#include <spdlog/spdlog.h>

#include "graphletqa/llm/structured.hpp"
#include "graphletqa/qa.hpp"

namespace graphletqa::qa {

llm::CompletionRequest generation_request(const prompt::PromptCatalog& catalog, const prompt::PromptConfig& config,
                                          const graphlet::Graphlet& graphlet, const LlmSettings& settings) {
  return {.request_id = "gen:" + graphlet.graphlet_id,
          .prompt = prompt::assemble_prompt(catalog, config, graphlet),
          .model = settings.model,
          .decoding = settings.decoding};
}

QARecord record_from_generation(const graphlet::Graphlet& graphlet, std::string_view raw) {
  QARecord r;
  r.graphlet_id = graphlet.graphlet_id;
  r.shape_ordinal = graphlet.shape.ordinal;
  r.raw_output = std::string(raw);

  const auto parsed = llm::parse_structured(raw, llm::StageSchema::generation);
  if (!parsed.ok()) {
    r.status = Status::parse_failed;
    r.violations.push_back(parsed.failure);
    return r;
  }
  const auto& j = *parsed.object;
  r.question = j.at("question").get<std::string>();
  r.answer = j.at("answer").get<std::string>();
  r.question_nodes = j.at("question_nodes").get<std::vector<std::string>>();
  r.hidden_nodes = j.at("hidden_nodes").get<std::vector<std::string>>();
  r.answer_node = j.at("answer_node").get<std::string>();
  r.reasoning = j.value("reasoning", "");

  auto known = [&](const std::string& name) {
    return std::any_of(graphlet.nodes.begin(), graphlet.nodes.end(),
                       [&](const graphlet::GraphletNode& n) { return n.name == name; });
  };
  auto& v = r.violations;
  if (r.question.empty()) v.push_back("empty question");
  if (r.answer.empty()) v.push_back("empty answer");
  if (r.question_nodes.empty() || r.question_nodes.size() > 2) {
    v.push_back("expected one or two question nodes, got " + std::to_string(r.question_nodes.size()));
  }
  if (std::find(r.question_nodes.begin(), r.question_nodes.end(), r.answer_node) != r.question_nodes.end()) {
    v.push_back("answer node '" + r.answer_node + "' is also a question node");
  }
  for (const auto& name : r.question_nodes) {
    if (!known(name)) v.push_back("question node '" + name + "' is not in the graphlet");
  }
  for (const auto& name : r.hidden_nodes) {
    if (!known(name)) v.push_back("hidden node '" + name + "' is not in the graphlet");
  }
  if (!known(r.answer_node)) v.push_back("answer node '" + r.answer_node + "' is not in the graphlet");
  r.status = v.empty() ? Status::generated : Status::parse_failed;
  return r;
}

QARecord generate_qa(llm::Gateway& gateway, const prompt::PromptCatalog& catalog, const prompt::PromptConfig& config,
                     const graphlet::Graphlet& graphlet, const LlmSettings& settings) {
  const auto result = gateway.complete(generation_request(catalog, config, graphlet, settings));
  return record_from_generation(graphlet, result.text);
}

std::vector<QARecord> generate_all(llm::Gateway& gateway, const prompt::PromptCatalog& catalog,
                                   const prompt::PromptConfig& config, std::span<const graphlet::Graphlet> graphlets,
                                   const LlmSettings& settings, util::Checkpoint* checkpoint) {
  catalog.validate(config);
  const auto rows = llm::run_checkpointed(
      gateway, graphlets.size(), [&](std::size_t i) { return graphlets[i].graphlet_id; },
      [&](std::size_t i) { return generation_request(catalog, config, graphlets[i], settings); },
      [&](std::size_t i, const llm::CompletionResult& result) {
        return to_json(record_from_generation(graphlets[i], result.text));
      },
      checkpoint);
  std::vector<QARecord> out;
  out.reserve(rows.size());
  std::size_t failed = 0;
  for (const auto& row : rows) {
    out.push_back(record_from_json(row));
    failed += out.back().status == Status::parse_failed;
  }
  spdlog::info("generation: {} records, {} failed validation", out.size(), failed);
  return out;
}

}  // namespace graphletqa::qa
