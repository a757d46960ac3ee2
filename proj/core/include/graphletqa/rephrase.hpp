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

#include "graphletqa/evidence.hpp"
#include "graphletqa/qa.hpp"

namespace graphletqa::rephrase {

enum class FormatId { yes_no, multiple_choice };

std::string_view to_string(FormatId format);
/// Accepts "yes_no" and "multiple_choice". Throws ConfigError.
FormatId format_from_string(std::string_view name);

/// One target-dataset item. yes_no uses context and label; multiple_choice
/// uses options and answer.
struct Exemplar {
  std::string id;
  std::string question;
  std::string context;
  std::string label;
  std::map<std::string, std::string> options;
  std::string answer;
};

/// Exemplar text as shown to the model.
std::string render(const Exemplar& exemplar, FormatId format);

struct ExemplarSet {
  FormatId format = FormatId::yes_no;
  std::vector<Exemplar> exemplars;  // ascending id
  evidence::Bm25Index index;
  const Exemplar& get(std::string_view id) const;
};

/// Reads a JSONL target dataset and indexes exemplar questions with the
/// evidence analyzer. yes_no lines: {id, question, context, label};
/// multiple_choice lines: {id, question, options: {A..D[, E]}, answer}.
/// Throws ParseError with the offending line.
ExemplarSet index_examples(const std::filesystem::path& path, FormatId format);

struct RephrasedQA {
  std::string source_qa_id;
  FormatId format = FormatId::yes_no;
  std::string question;
  std::string context;
  std::string label;
  std::map<std::string, std::string> options;
  std::string answer;
  std::vector<std::string> exemplar_ids;
};

/// Empty when the record satisfies its format.
std::vector<std::string> validate_format(const RephrasedQA& record);

nlohmann::json to_json(const RephrasedQA& record);
RephrasedQA rephrased_from_json(const nlohmann::json& j);

struct RephraseOutcome {
  std::string qa_id;
  std::optional<RephrasedQA> record;
  std::vector<std::string> violations;
  std::string raw;
};

/// Context for yes_no items: the bundle's snippets in rank order, or the
/// original answer when there are none.
std::string assemble_context(const qa::QARecord& qa, const evidence::EvidenceBundle& bundle);

/// Top n exemplar ids by BM25 over the record's question and answer, padded
/// with the remaining exemplars in id order when fewer than n match.
std::vector<std::string> select_exemplars(const ExemplarSet& set, const qa::QARecord& qa, std::size_t n);

llm::CompletionRequest rephrase_request(const qa::QARecord& qa, const evidence::EvidenceBundle& bundle,
                                        const ExemplarSet& set, std::span<const std::string> exemplar_ids,
                                        const qa::LlmSettings& settings);

/// Parses and validates a model output. Invalid outputs carry violations
/// and no record.
RephraseOutcome finalize_rephrase(const qa::QARecord& qa, const evidence::EvidenceBundle& bundle, FormatId format,
                                  std::vector<std::string> exemplar_ids, std::string_view raw);

/// qa must be accepted; throws ConfigError otherwise.
RephraseOutcome rephrase(llm::Gateway& gateway, const qa::QARecord& qa, const evidence::EvidenceBundle& bundle,
                         const ExemplarSet& set, std::size_t n_examples, const qa::LlmSettings& settings);

/// bundles[i] belongs to records[i].
std::vector<RephraseOutcome> rephrase_all(llm::Gateway& gateway, std::span<const qa::QARecord> records,
                                          std::span<const evidence::EvidenceBundle> bundles, const ExemplarSet& set,
                                          std::size_t n_examples, const qa::LlmSettings& settings,
                                          util::Checkpoint* checkpoint = nullptr);

/// Indices of a seeded uniform sample of `size` items, ascending. size 0 or
/// size >= count selects everything.
std::vector<std::size_t> select_subset(std::size_t count, std::size_t size, std::uint64_t seed);

/// `qa_id\tformat\tviolation` per violation.
std::string failures_tsv(std::span<const RephraseOutcome> outcomes, FormatId format);

}  // namespace graphletqa::rephrase
