#include "graphletqa/llm/structured.hpp"

#include <utility>
#include <vector>

namespace graphletqa::llm {

namespace {

enum class Kind { string, boolean, string_array, object };

struct Field {
  std::string_view name;
  Kind kind;
  bool required = true;
};

const std::vector<Field>& fields_for(StageSchema schema) {
  static const std::vector<Field> generation = {
      {"reasoning", Kind::string, false},    {"question_nodes", Kind::string_array},
      {"hidden_nodes", Kind::string_array},  {"answer_node", Kind::string},
      {"question", Kind::string},            {"answer", Kind::string}};
  static const std::vector<Field> judge = {{"reasoning", Kind::string, false},
                                           {"valid_question", Kind::boolean},
                                           {"original_answer_valid", Kind::boolean}};
  static const std::vector<Field> evidence = {
      {"reasoning", Kind::string, false}, {"relevant", Kind::boolean}, {"snippets", Kind::string_array}};
  static const std::vector<Field> yes_no = {{"question", Kind::string}, {"label", Kind::string}};
  static const std::vector<Field> mcq = {
      {"question", Kind::string}, {"options", Kind::object}, {"answer", Kind::string}};
  switch (schema) {
    case StageSchema::generation: return generation;
    case StageSchema::judge: return judge;
    case StageSchema::evidence: return evidence;
    case StageSchema::rephrase_yes_no: return yes_no;
    case StageSchema::rephrase_mcq: return mcq;
  }
  return generation;
}

bool matches(const nlohmann::json& v, Kind kind) {
  switch (kind) {
    case Kind::string: return v.is_string();
    case Kind::boolean: return v.is_boolean();
    case Kind::object: return v.is_object();
    case Kind::string_array:
      if (!v.is_array()) return false;
      for (const auto& e : v) {
        if (!e.is_string()) return false;
      }
      return true;
  }
  return false;
}

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::string: return "string";
    case Kind::boolean: return "boolean";
    case Kind::string_array: return "array of strings";
    case Kind::object: return "object";
  }
  return "?";
}

// End (exclusive) of the balanced object starting at raw[start] == '{'.
std::size_t balanced_end(std::string_view raw, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    const char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string_view to_string(StageSchema schema) {
  switch (schema) {
    case StageSchema::generation: return "generation";
    case StageSchema::judge: return "judge";
    case StageSchema::evidence: return "evidence";
    case StageSchema::rephrase_yes_no: return "rephrase_yes_no";
    case StageSchema::rephrase_mcq: return "rephrase_mcq";
  }
  return "unknown";
}

std::optional<nlohmann::json> extract_json_object(std::string_view raw) {
  for (auto pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    const auto end = balanced_end(raw, pos);
    if (end == std::string_view::npos) return std::nullopt;
    auto parsed = nlohmann::json::parse(raw.substr(pos, end - pos), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

ParsedOutput parse_structured(std::string_view raw, StageSchema schema) {
  ParsedOutput out;
  out.raw = std::string(raw);
  auto object = extract_json_object(raw);
  if (!object) {
    out.failure = "no JSON object found";
    return out;
  }
  for (const auto& field : fields_for(schema)) {
    const auto it = object->find(field.name);
    if (it == object->end()) {
      if (field.required) {
        out.failure = "missing field '" + std::string(field.name) + "'";
        return out;
      }
      continue;
    }
    if (!matches(*it, field.kind)) {
      out.failure = "field '" + std::string(field.name) + "' is not a " + std::string(kind_name(field.kind));
      return out;
    }
  }
  out.object = std::move(*object);
  return out;
}

}  // namespace graphletqa::llm
