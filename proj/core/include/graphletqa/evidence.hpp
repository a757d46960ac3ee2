#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "graphletqa/llm/gateway.hpp"
#include "graphletqa/qa.hpp"

namespace graphletqa::evidence {

inline constexpr std::string_view kAnalyzerVersion = "unicode-alnum-lower-v1";

/// Lowercased maximal runs of letters and digits. ASCII punctuation,
/// whitespace and the common Unicode punctuation blocks separate tokens;
/// other non-ASCII code points count as letters. No stemming, no stopwords.
std::vector<std::string> analyze(std::string_view text);

struct Document {
  std::string doc_id;
  std::string title;
  std::string abstract;
  std::size_t token_count = 0;
};

/// Reads `{"doc_id","title","abstract"}` lines. Documents whose abstract
/// analyzes to nothing are skipped with a warning. Throws ParseError,
/// DuplicateIdError, or InsufficientDataError for an empty corpus.
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Text indexed for a document: title and abstract joined by a space.
std::string indexed_text(const Document& doc);

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Posting {
  std::uint32_t doc = 0;  // index into doc_ids()
  std::uint32_t tf = 0;

  bool operator==(const Posting&) const = default;
};

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
};

/// Immutable inverted index. Documents are held in ascending doc_id order,
/// so every posting list is sorted by document.
class Bm25Index {
 public:
  struct Entry {
    std::string id;
    std::string text;
  };

  /// Throws DuplicateIdError, or InsufficientDataError when empty.
  static Bm25Index build(std::vector<Entry> entries, Bm25Params params = {});

  /// Directory layout is described in docs/index-format.md.
  void save(const std::filesystem::path& dir) const;
  static Bm25Index load(const std::filesystem::path& dir);

  std::size_t size() const noexcept { return doc_ids_.size(); }
  double average_length() const noexcept { return average_length_; }
  const Bm25Params& params() const noexcept { return params_; }
  std::span<const std::string> doc_ids() const noexcept { return doc_ids_; }
  std::span<const std::uint32_t> lengths() const noexcept { return lengths_; }
  const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const noexcept { return postings_; }

  std::size_t document_frequency(std::string_view term) const;
  double idf(std::string_view term) const;
  /// Index of doc_id in doc_ids(). Throws LookupError.
  std::uint32_t doc_index(std::string_view doc_id) const;

  /// Sum over query terms (with repeats) of idf * tf*(k1+1) / (tf + k1*norm).
  double score(std::span<const std::string> terms, std::string_view doc_id) const;

  /// Documents matching at least one term, by descending score then
  /// ascending doc_id, truncated to k.
  std::vector<ScoredDoc> top_k(std::span<const std::string> terms, std::size_t k) const;

  /// SHA-256 over the serialized postings and lengths.
  std::string checksum() const;
  nlohmann::json manifest() const;

 private:
  std::string postings_bytes() const;
  std::string lengths_bytes() const;

  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> lengths_;
  double average_length_ = 0.0;
  std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

Bm25Index build_index(std::span<const Document> corpus, Bm25Params params = {});

double bm25_score(const Bm25Index& index, std::span<const std::string> terms, std::string_view doc_id);

/// Query is question + " " + answer. An empty analyzed query returns nothing.
std::vector<ScoredDoc> retrieve(const Bm25Index& index, const qa::QARecord& record, std::size_t k = 10);

struct EvidenceAssessment {
  std::string doc_id;
  bool relevant = false;
  std::vector<std::string> snippets;
  std::string reasoning;
  bool parse_failed = false;
  /// Snippets removed because they were not verbatim substrings.
  std::size_t dropped_snippets = 0;
  /// Claimed relevant, but no snippet survived the substring check.
  bool downgraded = false;
};

llm::CompletionRequest evidence_request(const qa::QARecord& record, const Document& doc,
                                        const qa::LlmSettings& settings);

/// Parses the model's assessment and enforces snippet fidelity against the
/// abstract's bytes.
EvidenceAssessment finalize_assessment(const Document& doc, std::string_view raw);

EvidenceAssessment assess_evidence(llm::Gateway& gateway, const qa::QARecord& record, const Document& doc,
                                   const qa::LlmSettings& settings);

struct EvidenceBundle {
  std::string qa_id;
  std::vector<ScoredDoc> candidates;
  std::vector<EvidenceAssessment> assessments;
  std::size_t relevant_count = 0;
};

nlohmann::json to_json(const EvidenceAssessment& a);
EvidenceAssessment assessment_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EvidenceBundle& b);
EvidenceBundle bundle_from_json(const nlohmann::json& j);
void write_bundles_jsonl(const std::filesystem::path& path, std::span<const EvidenceBundle> bundles);
std::vector<EvidenceBundle> read_bundles_jsonl(const std::filesystem::path& path);

/// Retrieves k candidates per record and assesses each one. The checkpoint
/// is keyed by "<qa_id>|<doc_id>".
std::vector<EvidenceBundle> collect_evidence(llm::Gateway& gateway, const Bm25Index& index,
                                             std::span<const Document> corpus, std::span<const qa::QARecord> records,
                                             std::size_t k, const qa::LlmSettings& settings,
                                             util::Checkpoint* checkpoint = nullptr);

struct BundleStats {
  std::size_t bundles = 0;
  double zero_fraction = 0.0;
  double at_least_two_fraction = 0.0;
  double at_least_five_fraction = 0.0;
  /// relevant count -> number of bundles
  std::map<std::size_t, std::size_t> distribution;
  std::size_t dropped_snippets = 0;
  std::size_t downgraded = 0;
  std::size_t parse_failures = 0;
};

BundleStats bundle_stats(std::span<const EvidenceBundle> bundles);
std::string bundle_stats_tsv(const BundleStats& stats);

}  // namespace graphletqa::evidence
