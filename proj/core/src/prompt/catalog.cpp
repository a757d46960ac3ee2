#include "graphletqa/prompt/catalog.hpp"

#include <algorithm>
#include <set>

#include "graphletqa/errors.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::prompt {

namespace fs = std::filesystem;

namespace {

const Criterion kCriteria[] = {
    {"C1", "The answer is not given away anywhere in the question."},
    {"C2", "The question uses no graph vocabulary (graphlet, node, edge, subgraph)."},
    {"C3", "The answer uses no graph vocabulary (graphlet, node, edge, subgraph)."},
    {"C4", "The question is scientifically sound."},
    {"C5", "The answer is scientifically sound."},
    {"C6", "The answer actually resolves what the question asks."},
};

constexpr std::string_view kTemplateReasoning =
    "## How to work\n"
    "{{reasoning_instructions}}";

constexpr std::string_view kTemplateReflection =
    "## Review your draft\n"
    "{{reflection_instructions}}";

constexpr std::string_view kTemplateRoles =
    "## Node roles\n"
    "{{role_instructions}}";

constexpr std::string_view kTemplateSerialization =
    "## Graphlet\n"
    "You are given a graphlet: a small connected piece of a knowledge graph. Write one "
    "question-answer pair that is grounded in it. Relations between entities are not labelled; "
    "infer the most plausible relation from your own domain knowledge.\n"
    "{{node_list}}\n"
    "{{graphlet_structure}}";

constexpr std::string_view kTemplateExamples =
    "## Example\n"
    "{{examples}}";

constexpr std::string_view kTemplateSchema =
    "## Output format\n"
    "{{output_schema}}";

constexpr std::string_view kReasoningText =
    "Before writing anything, think step by step:\n"
    "1. For every pair of connected entities, state the most likely biological or clinical relation.\n"
    "2. Find a chain of relations that links one or two entities to a single target entity.\n"
    "3. Phrase a question whose answer can only be reached by following that chain.\n"
    "Put this reasoning in the \"reasoning\" field.";

constexpr std::string_view kReflectionText =
    "After drafting the pair, critique it against each check below and revise until all hold:\n"
    "- C1: the answer is not given away anywhere in the question.\n"
    "- C2: the question uses no graph vocabulary (graphlet, node, edge, subgraph).\n"
    "- C3: the answer uses no graph vocabulary either.\n"
    "- C4: the question is scientifically sound.\n"
    "- C5: the answer is scientifically sound.\n"
    "- C6: the answer actually resolves what the question asks.\n"
    "Only output the revised pair.";

constexpr std::string_view kRoleText =
    "Assign a role to the entities yourself. Choose one or two Question Nodes: the entities the "
    "question names explicitly. Choose exactly one Answer Node: the entity the answer identifies; it "
    "must not be a Question Node. Every other entity you rely on is a Hidden Node: it is never "
    "named in the question but is needed to reason from the Question Nodes to the Answer Node. "
    "Declare your choice in question_nodes, hidden_nodes and answer_node using the entity names "
    "exactly as listed.";

constexpr std::string_view kExamplesText =
    "Example graphlet with entities Metformin (drug), AMPK signalling (pathway) and "
    "Type 2 diabetes (disease), connected Metformin -- AMPK signalling and "
    "AMPK signalling -- Type 2 diabetes.\n"
    "Example output:\n"
    "{\"reasoning\": \"Metformin activates AMPK signalling, which improves insulin sensitivity.\", "
    "\"question_nodes\": [\"Metformin\"], \"hidden_nodes\": [\"AMPK signalling\"], "
    "\"answer_node\": \"Type 2 diabetes\", "
    "\"question\": \"Through activation of an energy-sensing kinase pathway, which chronic metabolic "
    "disorder is Metformin primarily used to treat?\", "
    "\"answer\": \"Type 2 diabetes; Metformin activates AMPK signalling, lowering hepatic glucose "
    "output and improving insulin sensitivity.\"}";

constexpr std::string_view kSchemaText =
    "Stage tag: #GEN\n"
    "Respond with exactly one JSON object and no other text:\n"
    "{\n"
    "  \"reasoning\": string,\n"
    "  \"question_nodes\": [string] (one or two entity names),\n"
    "  \"hidden_nodes\": [string],\n"
    "  \"answer_node\": string,\n"
    "  \"question\": string,\n"
    "  \"answer\": string\n"
    "}";

struct OptionalModule {
  std::string_view module_id;
  std::string_view short_name;
};

constexpr OptionalModule kOptional[] = {
    {kGuidedReasoning, "reasoning"},
    {kSelfReflection, "reflection"},
    {kRoleInstruction, "roles"},
    {kFewShotExamples, "examples"},
};

bool in_vocabulary(std::string_view name) {
  return std::find(kPlaceholderVocabulary.begin(), kPlaceholderVocabulary.end(), name) !=
         kPlaceholderVocabulary.end();
}

}  // namespace

std::span<const Criterion> quality_criteria() { return kCriteria; }

bool QualityCriteria::all() const noexcept {
  return std::all_of(met.begin(), met.end(), [](bool b) { return b; });
}

PromptCatalog::PromptCatalog(std::vector<PromptModule> modules, std::map<std::string, std::string> static_text,
                             std::vector<PromptConfig> ablation, PromptConfig full)
    : modules_(std::move(modules)),
      static_text_(std::move(static_text)),
      ablation_(std::move(ablation)),
      full_(std::move(full)) {
  std::sort(modules_.begin(), modules_.end(),
            [](const PromptModule& a, const PromptModule& b) { return a.position < b.position; });
  std::set<std::string> ids;
  std::set<int> positions;
  for (const auto& m : modules_) {
    if (!ids.insert(m.module_id).second) throw ConfigError("duplicate prompt module " + m.module_id);
    if (!positions.insert(m.position).second) {
      throw ConfigError("duplicate prompt module position " + std::to_string(m.position));
    }
    for (const auto& name : template_placeholders(m.text_template)) {
      if (!in_vocabulary(name)) {
        throw ConfigError("module " + m.module_id + " uses undeclared placeholder '" + name + "'");
      }
    }
  }
  for (const auto& [name, text] : static_text_) {
    if (!in_vocabulary(name)) throw ConfigError("static text for undeclared placeholder '" + name + "'");
  }
  std::set<std::string> config_ids;
  for (const auto& c : ablation_) {
    validate(c);
    if (!config_ids.insert(c.config_id).second) throw ConfigError("duplicate config id " + c.config_id);
  }
  validate(full_);
  if (!config_ids.insert(full_.config_id).second) throw ConfigError("duplicate config id " + full_.config_id);
  for (const auto& c : ablation_) {
    for (const auto& m : c.modules) {
      if (std::find(full_.modules.begin(), full_.modules.end(), m) == full_.modules.end()) {
        throw ConfigError("full config must include every module of " + c.config_id);
      }
    }
  }
}

PromptCatalog PromptCatalog::builtin() {
  std::vector<PromptModule> modules = {
      {std::string(kGuidedReasoning), std::string(kTemplateReasoning), 1},
      {std::string(kSelfReflection), std::string(kTemplateReflection), 2},
      {std::string(kRoleInstruction), std::string(kTemplateRoles), 3},
      {std::string(kGraphletSerialization), std::string(kTemplateSerialization), 4},
      {std::string(kFewShotExamples), std::string(kTemplateExamples), 5},
      {std::string(kOutputSchema), std::string(kTemplateSchema), 6},
  };
  std::map<std::string, std::string> static_text = {
      {"reasoning_instructions", std::string(kReasoningText)},
      {"reflection_instructions", std::string(kReflectionText)},
      {"role_instructions", std::string(kRoleText)},
      {"examples", std::string(kExamplesText)},
      {"output_schema", std::string(kSchemaText)},
  };
  // Grid over the four optional modules; mask 0 (nothing optional) is left out.
  std::vector<PromptConfig> ablation;
  for (unsigned mask = 1; mask < 16; ++mask) {
    PromptConfig c;
    std::string description = "graphlet-serialization + output-schema";
    for (unsigned bit = 0; bit < 4; ++bit) {
      if (!(mask >> bit & 1u)) continue;
      if (!c.config_id.empty()) c.config_id += '+';
      c.config_id += kOptional[bit].short_name;
      c.modules.emplace_back(kOptional[bit].module_id);
      description += " + " + std::string(kOptional[bit].module_id);
    }
    c.modules.emplace_back(kGraphletSerialization);
    c.modules.emplace_back(kOutputSchema);
    c.description = description;
    ablation.push_back(std::move(c));
  }
  PromptConfig full{"full", {}, "union of every catalog module"};
  for (const auto& m : modules) full.modules.push_back(m.module_id);
  return PromptCatalog(std::move(modules), std::move(static_text), std::move(ablation), std::move(full));
}

PromptCatalog PromptCatalog::load(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(util::read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
  try {
    std::vector<PromptModule> modules;
    for (const auto& m : manifest.at("modules")) {
      modules.push_back({m.at("module_id").get<std::string>(),
                         util::read_text_file(dir / m.at("template").get<std::string>()),
                         m.at("position").get<int>()});
    }
    std::map<std::string, std::string> static_text;
    for (const auto& [name, file] : manifest.at("static_text").items()) {
      static_text[name] = util::read_text_file(dir / file.get<std::string>());
    }
    auto read_config = [](const nlohmann::json& c) {
      return PromptConfig{c.at("config_id").get<std::string>(),
                          c.at("modules").get<std::vector<std::string>>(),
                          c.value("description", std::string())};
    };
    std::vector<PromptConfig> ablation;
    for (const auto& c : manifest.at("ablation_configs")) ablation.push_back(read_config(c));
    return PromptCatalog(std::move(modules), std::move(static_text), std::move(ablation),
                         read_config(manifest.at("full_config")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
}

void PromptCatalog::save(const fs::path& dir) const {
  nlohmann::json manifest;
  manifest["modules"] = nlohmann::json::array();
  for (const auto& m : modules_) {
    const std::string file = "modules/" + m.module_id + ".txt";
    util::write_text_file(dir / file, m.text_template);
    manifest["modules"].push_back({{"module_id", m.module_id}, {"position", m.position}, {"template", file}});
  }
  manifest["static_text"] = nlohmann::json::object();
  for (const auto& [name, text] : static_text_) {
    const std::string file = "static/" + name + ".txt";
    util::write_text_file(dir / file, text);
    manifest["static_text"][name] = file;
  }
  auto write_config = [](const PromptConfig& c) {
    return nlohmann::json{{"config_id", c.config_id}, {"modules", c.modules}, {"description", c.description}};
  };
  manifest["ablation_configs"] = nlohmann::json::array();
  for (const auto& c : ablation_) manifest["ablation_configs"].push_back(write_config(c));
  manifest["full_config"] = write_config(full_);
  util::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

const PromptModule& PromptCatalog::module(std::string_view module_id) const {
  for (const auto& m : modules_) {
    if (m.module_id == module_id) return m;
  }
  throw ConfigError("unknown prompt module '" + std::string(module_id) + "'");
}

std::vector<PromptConfig> PromptCatalog::list_configurations() const {
  std::vector<PromptConfig> out(ablation_.begin(), ablation_.end());
  out.push_back(full_);
  return out;
}

const PromptConfig& PromptCatalog::config(std::string_view config_id) const {
  if (full_.config_id == config_id) return full_;
  for (const auto& c : ablation_) {
    if (c.config_id == config_id) return c;
  }
  throw ConfigError("unknown prompt config '" + std::string(config_id) + "'");
}

void PromptCatalog::validate(const PromptConfig& config) const {
  if (config.config_id.empty()) throw ConfigError("prompt config without an id");
  std::set<std::string> seen;
  for (const auto& m : config.modules) {
    module(m);
    if (!seen.insert(m).second) throw ConfigError("config " + config.config_id + " repeats module " + m);
  }
  for (auto required : {kGraphletSerialization, kOutputSchema}) {
    if (!seen.contains(std::string(required))) {
      throw ConfigError("config " + config.config_id + " lacks required module " + std::string(required));
    }
  }
}

std::vector<std::string> template_placeholders(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) break;
    std::string name(text.substr(pos + 2, close - pos - 2));
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    pos = close + 2;
  }
  return names;
}

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::vector<std::string> missing;
  std::size_t pos = 0;
  while (true) {
    const auto open = text.find("{{", pos);
    const auto close = open == std::string_view::npos ? open : text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(pos));
      break;
    }
    out.append(text.substr(pos, open - pos));
    std::string name(text.substr(open + 2, close - open - 2));
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    if (auto it = values.find(name); it != values.end()) {
      out += it->second;
    } else if (std::find(missing.begin(), missing.end(), name) == missing.end()) {
      missing.push_back(name);
    }
    pos = close + 2;
  }
  if (!missing.empty()) throw AssemblyError(std::move(missing));
  return out;
}

std::string serialize_graphlet(const graphlet::Graphlet& graphlet) {
  std::string nodes = "Entities:\n";
  for (std::size_t i = 0; i < graphlet.nodes.size(); ++i) {
    const auto& n = graphlet.nodes[i];
    if (n.name.empty()) {
      throw SerializationError("graphlet " + graphlet.graphlet_id + ": node " + n.id + " has no name");
    }
    nodes += std::to_string(i + 1) + ". " + n.name + " (" + n.node_type + ")\n";
  }
  std::string edges = "Connections:\n";
  for (auto [i, j] : graphlet.edges) {
    edges += "- " + graphlet.nodes.at(static_cast<std::size_t>(i)).name + " -- " +
             graphlet.nodes.at(static_cast<std::size_t>(j)).name + "\n";
  }
  return nodes + edges;
}

namespace {

std::pair<std::string, std::string> serialize_parts(const graphlet::Graphlet& graphlet) {
  const auto text = serialize_graphlet(graphlet);
  const auto split = text.find("Connections:\n");
  auto node_part = text.substr(0, split);
  auto edge_part = text.substr(split);
  if (!node_part.empty() && node_part.back() == '\n') node_part.pop_back();
  if (!edge_part.empty() && edge_part.back() == '\n') edge_part.pop_back();
  return {node_part, edge_part};
}

}  // namespace

std::string assemble_prompt(const PromptCatalog& catalog, const PromptConfig& config,
                            const graphlet::Graphlet& graphlet) {
  catalog.validate(config);
  auto values = catalog.static_text();
  auto [node_list, structure] = serialize_parts(graphlet);
  values["node_list"] = std::move(node_list);
  values["graphlet_structure"] = std::move(structure);

  std::string prompt;
  std::vector<std::string> missing;
  for (const auto& module : catalog.modules()) {
    if (std::find(config.modules.begin(), config.modules.end(), module.module_id) == config.modules.end()) {
      continue;
    }
    try {
      if (!prompt.empty()) prompt += "\n\n";
      prompt += render_template(module.text_template, values);
    } catch (const AssemblyError& e) {
      for (const auto& p : e.placeholders()) {
        if (std::find(missing.begin(), missing.end(), p) == missing.end()) missing.push_back(p);
      }
    }
  }
  if (!missing.empty()) throw AssemblyError(std::move(missing));
  return prompt + "\n";
}

}  // namespace graphletqa::prompt
