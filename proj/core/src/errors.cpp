#include "graphletqa/errors.hpp"

namespace graphletqa {

namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::filesystem::path path, std::size_t line, const std::string& message)
    : Error(path.string() + ":" + std::to_string(line) + ": " + message),
      path_(std::move(path)),
      line_(line) {}

ReferentialError::ReferentialError(std::vector<std::string> ids)
    : Error("edges reference unknown node ids: " + join_ids(ids)), ids_(std::move(ids)) {}

DuplicateIdError::DuplicateIdError(std::string what_kind, std::string id)
    : Error("duplicate " + what_kind + " id: " + id), id_(std::move(id)) {}

PathError::PathError(std::filesystem::path path, const std::string& message)
    : Error(path.string() + ": " + message), path_(std::move(path)) {}

AssemblyError::AssemblyError(std::vector<std::string> placeholders)
    : Error("unresolved prompt placeholders: " + join_ids(placeholders)),
      placeholders_(std::move(placeholders)) {}

HttpStatusError::HttpStatusError(int status, const std::string& message)
    : Error("HTTP " + std::to_string(status) + ": " + message), status_(status) {}

}  // namespace graphletqa
