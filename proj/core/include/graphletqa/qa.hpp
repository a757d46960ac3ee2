#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphletqa/graphlet/sampling.hpp"
#include "graphletqa/llm/gateway.hpp"
#include "graphletqa/prompt/catalog.hpp"

namespace graphletqa::qa {

enum class Status { generated, parse_failed, length_culled, judge_rejected, accepted };

std::string_view to_string(Status status);
/// Throws ConfigError on an unknown name.
Status status_from_string(std::string_view name);

struct JudgeVerdict {
  bool valid_question = false;
  bool original_answer_valid = false;
  std::string reasoning;
  /// The judge output could not be parsed; both booleans are false.
  bool parse_failed = false;
  std::string raw;

  bool accepts() const noexcept { return !parse_failed && valid_question && original_answer_valid; }
};

struct QARecord {
  std::string graphlet_id;
  int shape_ordinal = 0;
  std::string question;
  std::string answer;
  std::vector<std::string> question_nodes;
  std::vector<std::string> hidden_nodes;
  std::string answer_node;
  Status status = Status::generated;
  std::optional<JudgeVerdict> verdict;
  /// Reasoning trace from the generation output.
  std::string reasoning;
  /// Raw generation output, kept for every record.
  std::string raw_output;
  /// Why a record failed structural validation.
  std::vector<std::string> violations;
};

nlohmann::json to_json(const QARecord& record);
QARecord record_from_json(const nlohmann::json& j);

void write_records_jsonl(const std::filesystem::path& path, std::span<const QARecord> records);
std::vector<QARecord> read_records_jsonl(const std::filesystem::path& path);

/// Model id and decoding parameters shared by every LLM-backed stage.
struct LlmSettings {
  std::string model = "mock";
  llm::DecodingParams decoding;
};

// ---- generation ----------------------------------------------------------

llm::CompletionRequest generation_request(const prompt::PromptCatalog& catalog, const prompt::PromptConfig& config,
                                          const graphlet::Graphlet& graphlet, const LlmSettings& settings);

/// Parses a generation output and validates the declared roles against the
/// graphlet: one or two question nodes, an answer node outside them, every
/// role naming a graphlet node. Failures yield status parse_failed.
QARecord record_from_generation(const graphlet::Graphlet& graphlet, std::string_view raw);

QARecord generate_qa(llm::Gateway& gateway, const prompt::PromptCatalog& catalog, const prompt::PromptConfig& config,
                     const graphlet::Graphlet& graphlet, const LlmSettings& settings);

/// One record per graphlet, in input order. Completed graphlets found in
/// the checkpoint are not sent again.
std::vector<QARecord> generate_all(llm::Gateway& gateway, const prompt::PromptCatalog& catalog,
                                   const prompt::PromptConfig& config, std::span<const graphlet::Graphlet> graphlets,
                                   const LlmSettings& settings, util::Checkpoint* checkpoint = nullptr);

// ---- filters -------------------------------------------------------------

struct FilterResult {
  std::vector<QARecord> kept;
  /// Input records that were removed, with their terminal status set.
  std::vector<QARecord> removed;
};

/// Removes parse_failed records.
FilterResult structural_filter(std::span<const QARecord> records);

struct FieldBounds {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double mean = 0.0;
  /// Population standard deviation.
  double stddev = 0.0;
  std::size_t count = 0;

  bool contains(std::size_t length) const noexcept { return length >= lo && length <= hi; }
};

struct LengthBounds {
  FieldBounds question;
  FieldBounds answer;
  double z = 3.0;
};

/// Bounds [max(1, ceil(mean - z*sd)), floor(mean + z*sd)] over lengths.
/// Sums are accumulated exactly, so the result does not depend on order.
FieldBounds field_bounds(std::span<const std::size_t> lengths, double z);

/// Lengths are Unicode scalar counts. Throws InsufficientDataError for
/// fewer than two records.
LengthBounds compute_length_bounds(std::span<const QARecord> records, double z = 3.0);

/// Culls a record iff its question or answer length lies outside the bounds.
FilterResult length_filter(std::span<const QARecord> records, const LengthBounds& bounds);

nlohmann::json to_json(const LengthBounds& bounds);

// ---- judge ---------------------------------------------------------------

llm::CompletionRequest judge_request(const QARecord& record, const LlmSettings& settings);

/// Unparseable output gives a verdict with parse_failed set.
JudgeVerdict parse_verdict(std::string_view raw);

/// Sets status to accepted or judge_rejected.
QARecord apply_verdict(QARecord record, JudgeVerdict verdict);

QARecord judge(llm::Gateway& gateway, const QARecord& record, const LlmSettings& settings);

std::vector<QARecord> judge_all(llm::Gateway& gateway, std::span<const QARecord> records,
                                const LlmSettings& settings, util::Checkpoint* checkpoint = nullptr);

// ---- accounting ----------------------------------------------------------

struct Funnel {
  std::uint64_t generated = 0;
  std::uint64_t parse_failed = 0;
  std::uint64_t length_culled = 0;
  std::uint64_t judge_rejected = 0;
  std::uint64_t judge_parse_failed = 0;
  std::uint64_t accepted = 0;

  /// Records that reached the judge.
  std::uint64_t judged() const noexcept { return judge_rejected + judge_parse_failed + accepted; }
  bool conserved() const noexcept {
    return generated == parse_failed + length_culled + judge_rejected + judge_parse_failed + accepted;
  }
};

struct ShapeAcceptance {
  int shape_ordinal = 0;
  std::uint64_t generated = 0;
  std::uint64_t accepted = 0;
  double ratio() const noexcept { return generated ? static_cast<double>(accepted) / generated : 0.0; }
};

struct StageReport {
  Funnel funnel;
  std::vector<ShapeAcceptance> shapes;
  /// Records whose status is still `generated`; nonzero means the run is
  /// incomplete.
  std::uint64_t pending = 0;
};

/// judge_rejected records with a parse-failed verdict are counted in
/// judge_parse_failed instead.
StageReport stage_stats(std::span<const QARecord> records);

/// Stage counts plus acceptance ratios under both denominators: all judged
/// records, and judged records excluding judge parse failures.
std::string funnel_tsv(const Funnel& funnel);
std::string shape_acceptance_tsv(std::span<const ShapeAcceptance> shapes);

}  // namespace graphletqa::qa
