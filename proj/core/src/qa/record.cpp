#include <fstream>

#include "graphletqa/errors.hpp"
#include "graphletqa/qa.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::qa {

namespace {

constexpr std::pair<Status, std::string_view> kStatusNames[] = {
    {Status::generated, "generated"},
    {Status::parse_failed, "parse_failed"},
    {Status::length_culled, "length_culled"},
    {Status::judge_rejected, "judge_rejected"},
    {Status::accepted, "accepted"},
};

}  // namespace

std::string_view to_string(Status status) {
  for (auto [s, name] : kStatusNames) {
    if (s == status) return name;
  }
  return "unknown";
}

Status status_from_string(std::string_view name) {
  for (auto [s, n] : kStatusNames) {
    if (n == name) return s;
  }
  throw ConfigError("unknown record status '" + std::string(name) + "'");
}

nlohmann::json to_json(const QARecord& r) {
  nlohmann::json j = {
      {"graphlet_id", r.graphlet_id},
      {"shape_ordinal", r.shape_ordinal},
      {"status", to_string(r.status)},
      {"question", r.question},
      {"answer", r.answer},
      {"question_nodes", r.question_nodes},
      {"hidden_nodes", r.hidden_nodes},
      {"answer_node", r.answer_node},
      {"reasoning", r.reasoning},
      {"violations", r.violations},
      {"raw_output", r.raw_output},
  };
  if (r.verdict) {
    j["verdict"] = {{"valid_question", r.verdict->valid_question},
                    {"original_answer_valid", r.verdict->original_answer_valid},
                    {"reasoning", r.verdict->reasoning},
                    {"parse_failed", r.verdict->parse_failed},
                    {"raw", r.verdict->raw}};
  } else {
    j["verdict"] = nullptr;
  }
  return j;
}

QARecord record_from_json(const nlohmann::json& j) {
  QARecord r;
  r.graphlet_id = j.at("graphlet_id").get<std::string>();
  r.shape_ordinal = j.at("shape_ordinal").get<int>();
  r.status = status_from_string(j.at("status").get<std::string>());
  r.question = j.value("question", "");
  r.answer = j.value("answer", "");
  r.question_nodes = j.value("question_nodes", std::vector<std::string>{});
  r.hidden_nodes = j.value("hidden_nodes", std::vector<std::string>{});
  r.answer_node = j.value("answer_node", "");
  r.reasoning = j.value("reasoning", "");
  r.violations = j.value("violations", std::vector<std::string>{});
  r.raw_output = j.value("raw_output", "");
  if (auto it = j.find("verdict"); it != j.end() && it->is_object()) {
    JudgeVerdict v;
    v.valid_question = it->at("valid_question").get<bool>();
    v.original_answer_valid = it->at("original_answer_valid").get<bool>();
    v.reasoning = it->value("reasoning", "");
    v.parse_failed = it->value("parse_failed", false);
    v.raw = it->value("raw", "");
    r.verdict = std::move(v);
  }
  return r;
}

void write_records_jsonl(const std::filesystem::path& path, std::span<const QARecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += util::dump_line(to_json(r));
    out += '\n';
  }
  util::write_text_file(path, out);
}

std::vector<QARecord> read_records_jsonl(const std::filesystem::path& path) {
  std::vector<QARecord> out;
  util::read_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line, e.what());
    } catch (const ConfigError& e) {
      throw ParseError(path, line, e.what());
    }
  });
  return out;
}

}  // namespace graphletqa::qa
