#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace graphletqa::util {

std::vector<std::string> split_tabs(std::string_view line);

/// Reads a TSV file with a mandatory header row. The callback receives the
/// fields and the 1-based line number; blank lines are skipped. Throws
/// ParseError if the header does not match or a row has the wrong width.
void read_tsv(const std::filesystem::path& path, const std::vector<std::string>& header,
              const std::function<void(const std::vector<std::string>&, std::size_t)>& on_row);

/// Calls on_record for every non-blank JSONL line. Malformed JSON raises
/// ParseError with the line number.
void read_jsonl(const std::filesystem::path& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& on_record);

std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and renames over the target.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// Compact single-line JSON dump used for every JSONL file we write.
std::string dump_line(const nlohmann::json& j);

/// Append-only JSONL checkpoint keyed by a string field. Thread-safe appends.
class Checkpoint {
 public:
  /// Opens `path`. With resume=true, existing records are loaded and kept;
  /// otherwise the file is truncated. A torn trailing line is discarded.
  Checkpoint(std::filesystem::path path, std::string key_field, bool resume);

  bool contains(const std::string& key) const;
  const nlohmann::json* find(const std::string& key) const;
  std::size_t size() const;

  void append(const nlohmann::json& record);

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::string key_field_;
  std::map<std::string, nlohmann::json> records_;
  std::ofstream out_;
  mutable std::mutex mu_;
};

}  // namespace graphletqa::util
