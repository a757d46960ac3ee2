#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphletqa/graphlet/sampling.hpp"

namespace graphletqa::prompt {

// Module ids of the fixed catalog.
inline constexpr std::string_view kGuidedReasoning = "guided-reasoning";
inline constexpr std::string_view kSelfReflection = "self-reflection";
inline constexpr std::string_view kRoleInstruction = "role-instruction";
inline constexpr std::string_view kGraphletSerialization = "graphlet-serialization";
inline constexpr std::string_view kFewShotExamples = "few-shot-examples";
inline constexpr std::string_view kOutputSchema = "output-schema";

/// Placeholders a template may use. node_list and graphlet_structure come
/// from the graphlet; the rest are static instruction text.
inline constexpr std::array<std::string_view, 7> kPlaceholderVocabulary = {
    "graphlet_structure", "node_list",       "role_instructions", "output_schema",
    "reasoning_instructions", "reflection_instructions", "examples"};

struct PromptModule {
  std::string module_id;
  std::string text_template;
  int position = 0;
};

struct PromptConfig {
  std::string config_id;
  std::vector<std::string> modules;
  std::string description;
};

/// One of the six generation quality criteria used when comparing prompt
/// configurations.
struct Criterion {
  std::string id;
  std::string description;
};

/// The six criteria, C1..C6, in order.
std::span<const Criterion> quality_criteria();

struct QualityCriteria {
  std::array<bool, 6> met{};
  bool all() const noexcept;
};

/// Module templates, static instruction text and the configuration grid.
class PromptCatalog {
 public:
  /// Compiled-in catalog: six modules, 15 ablation configs and "full".
  static PromptCatalog builtin();

  /// Loads a directory written by save(). Throws ConfigError / PathError.
  static PromptCatalog load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  PromptCatalog(std::vector<PromptModule> modules, std::map<std::string, std::string> static_text,
                std::vector<PromptConfig> ablation, PromptConfig full);

  const std::vector<PromptModule>& modules() const noexcept { return modules_; }
  const PromptModule& module(std::string_view module_id) const;
  const std::map<std::string, std::string>& static_text() const noexcept { return static_text_; }

  std::span<const PromptConfig> ablation_configs() const noexcept { return ablation_; }
  const PromptConfig& full_config() const noexcept { return full_; }

  /// The 15 ablation configs followed by the full config.
  std::vector<PromptConfig> list_configurations() const;

  /// Lookup by id across ablation configs and "full". Throws ConfigError.
  const PromptConfig& config(std::string_view config_id) const;

  /// Throws ConfigError unless the config names known modules, without
  /// repeats, and includes both graphlet-serialization and output-schema.
  void validate(const PromptConfig& config) const;

 private:
  std::vector<PromptModule> modules_;
  std::map<std::string, std::string> static_text_;
  std::vector<PromptConfig> ablation_;
  PromptConfig full_;
};

/// Node lines `1. name (type)` followed by unlabeled `- a -- b` edge lines.
/// Throws SerializationError for an unnamed node.
std::string serialize_graphlet(const graphlet::Graphlet& graphlet);

/// Concatenates the config's modules in position order with placeholders
/// filled. Throws ConfigError for an invalid config and AssemblyError for
/// unresolved placeholders.
std::string assemble_prompt(const PromptCatalog& catalog, const PromptConfig& config,
                            const graphlet::Graphlet& graphlet);

/// Replaces `{{name}}` occurrences. Names without a value are collected into
/// an AssemblyError.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

/// Placeholder names used by a template, in order of first appearance.
std::vector<std::string> template_placeholders(std::string_view text);

}  // namespace graphletqa::prompt
