#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/evidence.hpp"
#include "graphletqa/util/hash.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::evidence {

namespace {

constexpr std::string_view kPostingsMagic = "GQAPOST1";
constexpr std::string_view kLengthsMagic = "GQALEN01";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_str(std::string& out, std::string_view s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(std::string bytes, std::filesystem::path path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void expect_magic(std::string_view magic) {
    if (bytes_.compare(0, magic.size(), magic) != 0) fail("bad magic");
    pos_ = magic.size();
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::string str() {
    const auto n = u32();
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void expect_end() {
    if (pos_ != bytes_.size()) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_, 0, what + " at byte " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail("truncated file");
  }

  std::string bytes_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

void check_params(const Bm25Params& p) {
  if (!(p.k1 >= 0.0) || !(p.b >= 0.0 && p.b <= 1.0)) throw ConfigError("BM25 needs k1 >= 0 and 0 <= b <= 1");
}

}  // namespace

Bm25Index Bm25Index::build(std::vector<Entry> entries, Bm25Params params) {
  check_params(params);
  if (entries.empty()) throw InsufficientDataError("cannot index an empty collection");
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].id == entries[i - 1].id) throw DuplicateIdError("document", entries[i].id);
  }

  Bm25Index index;
  index.params_ = params;
  index.doc_ids_.reserve(entries.size());
  index.lengths_.reserve(entries.size());
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < entries.size(); ++d) {
    const auto tokens = analyze(entries[d].text);
    std::map<std::string_view, std::uint32_t> tf;
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, count] : tf) {
      auto it = index.postings_.find(term);
      if (it == index.postings_.end()) it = index.postings_.emplace(std::string(term), std::vector<Posting>{}).first;
      it->second.push_back({d, count});
    }
    index.doc_ids_.push_back(std::move(entries[d].id));
    index.lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total += tokens.size();
  }
  index.average_length_ = static_cast<double>(total) / static_cast<double>(entries.size());
  return index;
}

std::size_t Bm25Index::document_frequency(std::string_view term) const {
  const auto it = postings_.find(term);
  return it == postings_.end() ? 0 : it->second.size();
}

double Bm25Index::idf(std::string_view term) const {
  const double n = static_cast<double>(doc_ids_.size());
  const double df = static_cast<double>(document_frequency(term));
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::uint32_t Bm25Index::doc_index(std::string_view doc_id) const {
  const auto it = std::lower_bound(doc_ids_.begin(), doc_ids_.end(), doc_id);
  if (it == doc_ids_.end() || *it != doc_id) throw LookupError("document '" + std::string(doc_id) + "' is not indexed");
  return static_cast<std::uint32_t>(it - doc_ids_.begin());
}

double Bm25Index::score(std::span<const std::string> terms, std::string_view doc_id) const {
  const auto d = doc_index(doc_id);
  const double norm = 1.0 - params_.b + params_.b * lengths_[d] / average_length_;
  double total = 0.0;
  for (const auto& term : terms) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const auto& list = it->second;
    const auto p = std::lower_bound(list.begin(), list.end(), d,
                                    [](const Posting& x, std::uint32_t doc) { return x.doc < doc; });
    if (p == list.end() || p->doc != d) continue;
    const double tf = p->tf;
    total += idf(term) * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
  }
  return total;
}

std::vector<ScoredDoc> Bm25Index::top_k(std::span<const std::string> terms, std::size_t k) const {
  std::vector<double> acc(doc_ids_.size(), 0.0);
  std::vector<char> hit(doc_ids_.size(), 0);
  for (const auto& term : terms) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const auto& p : it->second) {
      const double tf = p.tf;
      const double norm = 1.0 - params_.b + params_.b * lengths_[p.doc] / average_length_;
      acc[p.doc] += w * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
      hit[p.doc] = 1;
    }
  }
  std::vector<std::uint32_t> matched;
  for (std::uint32_t d = 0; d < hit.size(); ++d) {
    if (hit[d]) matched.push_back(d);
  }
  // Documents are stored in doc_id order, so index order is the tie-break.
  auto better = [&](std::uint32_t a, std::uint32_t b) { return acc[a] != acc[b] ? acc[a] > acc[b] : a < b; };
  const std::size_t n = std::min(k, matched.size());
  std::partial_sort(matched.begin(), matched.begin() + static_cast<std::ptrdiff_t>(n), matched.end(), better);
  std::vector<ScoredDoc> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({doc_ids_[matched[i]], acc[matched[i]]});
  return out;
}

std::string Bm25Index::postings_bytes() const {
  std::string out(kPostingsMagic);
  put_u32(out, static_cast<std::uint32_t>(postings_.size()));
  for (const auto& [term, list] : postings_) {
    put_str(out, term);
    put_u32(out, static_cast<std::uint32_t>(list.size()));
    for (const auto& p : list) {
      put_u32(out, p.doc);
      put_u32(out, p.tf);
    }
  }
  return out;
}

std::string Bm25Index::lengths_bytes() const {
  std::string out(kLengthsMagic);
  put_u32(out, static_cast<std::uint32_t>(doc_ids_.size()));
  for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
    put_str(out, doc_ids_[d]);
    put_u32(out, lengths_[d]);
  }
  return out;
}

std::string Bm25Index::checksum() const { return util::sha256_hex(postings_bytes() + lengths_bytes()); }

nlohmann::json Bm25Index::manifest() const {
  const auto postings = postings_bytes();
  const auto lengths = lengths_bytes();
  return {{"format", "graphletqa-bm25/1"},
          {"analyzer", kAnalyzerVersion},
          {"k1", params_.k1},
          {"b", params_.b},
          {"document_count", doc_ids_.size()},
          {"average_length", average_length_},
          {"term_count", postings_.size()},
          {"postings_sha256", util::sha256_hex(postings)},
          {"lengths_sha256", util::sha256_hex(lengths)},
          {"checksum", util::sha256_hex(postings + lengths)}};
}

void Bm25Index::save(const std::filesystem::path& dir) const {
  util::write_text_file(dir / "postings.bin", postings_bytes());
  util::write_text_file(dir / "lengths.bin", lengths_bytes());
  util::write_text_file(dir / "manifest.json", manifest().dump(2) + "\n");
}

Bm25Index Bm25Index::load(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  auto m = nlohmann::json::parse(util::read_text_file(manifest_path), nullptr, false);
  if (m.is_discarded() || !m.is_object()) throw ParseError(manifest_path, 0, "manifest is not a JSON object");
  if (m.value("analyzer", "") != kAnalyzerVersion) {
    throw ConfigError("index " + dir.string() + " was built with analyzer '" + m.value("analyzer", "") +
                      "', expected '" + std::string(kAnalyzerVersion) + "'");
  }
  Bm25Index index;
  index.params_ = {m.at("k1").get<double>(), m.at("b").get<double>()};
  check_params(index.params_);

  Reader lengths(util::read_text_file(dir / "lengths.bin"), dir / "lengths.bin");
  lengths.expect_magic(kLengthsMagic);
  const auto n = lengths.u32();
  std::uint64_t total = 0;
  for (std::uint32_t d = 0; d < n; ++d) {
    index.doc_ids_.push_back(lengths.str());
    index.lengths_.push_back(lengths.u32());
    total += index.lengths_.back();
    if (d > 0 && !(index.doc_ids_[d - 1] < index.doc_ids_[d])) lengths.fail("document ids out of order");
  }
  lengths.expect_end();
  if (n == 0) throw InsufficientDataError("index " + dir.string() + " is empty");
  index.average_length_ = static_cast<double>(total) / n;

  Reader postings(util::read_text_file(dir / "postings.bin"), dir / "postings.bin");
  postings.expect_magic(kPostingsMagic);
  const auto terms = postings.u32();
  for (std::uint32_t t = 0; t < terms; ++t) {
    auto term = postings.str();
    std::vector<Posting> list(postings.u32());
    for (auto& p : list) {
      p.doc = postings.u32();
      p.tf = postings.u32();
      if (p.doc >= n) postings.fail("posting references unknown document");
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  postings.expect_end();

  if (index.checksum() != m.value("checksum", "")) {
    throw ParseError(manifest_path, 0, "index checksum does not match manifest");
  }
  return index;
}

Bm25Index build_index(std::span<const Document> corpus, Bm25Params params) {
  std::vector<Bm25Index::Entry> entries;
  entries.reserve(corpus.size());
  for (const auto& d : corpus) entries.push_back({d.doc_id, indexed_text(d)});
  return Bm25Index::build(std::move(entries), params);
}

double bm25_score(const Bm25Index& index, std::span<const std::string> terms, std::string_view doc_id) {
  return index.score(terms, doc_id);
}

std::vector<ScoredDoc> retrieve(const Bm25Index& index, const qa::QARecord& record, std::size_t k) {
  const auto terms = analyze(record.question + " " + record.answer);
  if (terms.empty()) {
    spdlog::warn("record {} has an empty query after analysis", record.graphlet_id);
    return {};
  }
  return index.top_k(terms, k);
}

}  // namespace graphletqa::evidence
