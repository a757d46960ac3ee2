#include <nlohmann/json.hpp>
#include <set>
#include <spdlog/spdlog.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/evidence.hpp"
#include "graphletqa/util/io.hpp"
#include "graphletqa/util/utf8.hpp"

namespace graphletqa::evidence {

namespace {

bool is_word(char32_t c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  if (c >= 0x80 && c <= 0xBF) return c == 0xAA || c == 0xB2 || c == 0xB3 || c == 0xB5 || c == 0xB9 || c == 0xBA;
  if (c == 0xD7 || c == 0xF7) return false;
  if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows, math operators
  if (c >= 0x3000 && c <= 0x303F) return false;  // CJK punctuation
  if (c >= 0xFE30 && c <= 0xFE4F) return false;
  if (c >= 0xFF00 && c <= 0xFF0F) return false;
  if (c >= 0xFF1A && c <= 0xFF20) return false;
  if (c >= 0xFF3B && c <= 0xFF40) return false;
  if (c >= 0xFF5B && c <= 0xFF65) return false;
  if (c == 0xFEFF || c == 0xFFFD) return false;
  return true;
}

char32_t lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return c | 1;
  if (c >= 0x139 && c <= 0x148 && (c & 1)) return c + 1;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

}  // namespace

std::vector<std::string> analyze(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char32_t c : util::decode_utf8(text)) {
    if (is_word(c)) {
      util::append_utf8(current, lower(c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string indexed_text(const Document& doc) { return doc.title + " " + doc.abstract; }

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::vector<Document> docs;
  std::set<std::string, std::less<>> seen;
  util::read_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(path, line, "expected a JSON object");
    Document d;
    for (const char* field : {"doc_id", "title", "abstract"}) {
      const auto it = j.find(field);
      if (it == j.end() || !it->is_string()) {
        throw ParseError(path, line, std::string("field '") + field + "' missing or not a string");
      }
    }
    d.doc_id = j["doc_id"].get<std::string>();
    d.title = j["title"].get<std::string>();
    d.abstract = j["abstract"].get<std::string>();
    if (d.doc_id.empty()) throw ParseError(path, line, "empty doc_id");
    if (!seen.insert(d.doc_id).second) throw DuplicateIdError("document", d.doc_id);
    if (analyze(d.abstract).empty()) {
      spdlog::warn("{}:{}: document {} has no indexable abstract text, skipped", path.string(), line, d.doc_id);
      return;
    }
    d.token_count = analyze(indexed_text(d)).size();
    docs.push_back(std::move(d));
  });
  if (docs.empty()) throw InsufficientDataError("corpus " + path.string() + " has no usable documents");
  return docs;
}

}  // namespace graphletqa::evidence
