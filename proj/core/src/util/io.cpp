#include "graphletqa/util/io.hpp"

#include <sstream>

#include "graphletqa/errors.hpp"

namespace graphletqa::util {

namespace fs = std::filesystem;

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::ifstream open_input(const fs::path& path) {
  if (!fs::exists(path)) throw PathError(path, "file does not exist");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError(path, "cannot open for reading");
  return in;
}

}  // namespace

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

void read_tsv(const fs::path& path, const std::vector<std::string>& header,
              const std::function<void(const std::vector<std::string>&, std::size_t)>& on_row) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (!saw_header) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (split_tabs(line) != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : "<TAB>") + h;
        throw ParseError(path, line_no, "expected header '" + expected + "'");
      }
      saw_header = true;
      continue;
    }
    if (is_blank(line)) continue;
    auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(fields.size()));
    }
    on_row(fields, line_no);
  }
  if (!saw_header) throw ParseError(path, 1, "missing header row");
}

void read_jsonl(const fs::path& path,
                const std::function<void(const nlohmann::json&, std::size_t)>& on_record) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    on_record(j, line_no);
  }
}

std::string read_text_file(const fs::path& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PathError(tmp, "cannot open for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw PathError(tmp, "write failed");
  }
  fs::rename(tmp, path);
}

std::string dump_line(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Checkpoint::Checkpoint(fs::path path, std::string key_field, bool resume)
    : path_(std::move(path)), key_field_(std::move(key_field)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  std::string valid_prefix;
  if (resume && fs::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      // Only newline-terminated lines were fully flushed.
      if (in.eof()) break;
      try {
        auto j = nlohmann::json::parse(line);
        auto key = j.at(key_field_).get<std::string>();
        records_.insert_or_assign(std::move(key), std::move(j));
        valid_prefix += line;
        valid_prefix += '\n';
      } catch (const nlohmann::json::exception&) {
        break;
      }
    }
  }
  out_.open(path_, std::ios::binary | std::ios::trunc);
  if (!out_) throw PathError(path_, "cannot open checkpoint");
  out_ << valid_prefix;
  out_.flush();
}

bool Checkpoint::contains(const std::string& key) const {
  std::lock_guard lock(mu_);
  return records_.contains(key);
}

const nlohmann::json* Checkpoint::find(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

std::size_t Checkpoint::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

void Checkpoint::append(const nlohmann::json& record) {
  std::lock_guard lock(mu_);
  out_ << dump_line(record) << '\n';
  out_.flush();
  records_.insert_or_assign(record.at(key_field_).get<std::string>(), record);
}

}  // namespace graphletqa::util
