#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace graphletqa::llm {

enum class StageSchema { generation, judge, evidence, rephrase_yes_no, rephrase_mcq };

struct ParsedOutput {
  std::optional<nlohmann::json> object;
  /// Raw model text, kept for failures and for audit.
  std::string raw;
  /// Empty on success.
  std::string failure;

  bool ok() const noexcept { return object.has_value(); }
};

/// Locates the first complete JSON object in `raw`, tolerating code fences
/// and surrounding prose, then checks the schema's required fields and types.
/// Never throws.
ParsedOutput parse_structured(std::string_view raw, StageSchema schema);

/// First balanced `{...}` in `raw` that parses as a JSON object.
std::optional<nlohmann::json> extract_json_object(std::string_view raw);

std::string_view to_string(StageSchema schema);

}  // namespace graphletqa::llm
