#include <cstdio>
#include <spdlog/spdlog.h>
#include <unordered_map>

#include "graphletqa/errors.hpp"
#include "graphletqa/evidence.hpp"
#include "graphletqa/llm/structured.hpp"
#include "graphletqa/prompt/prompts.hpp"
#include "graphletqa/util/io.hpp"

namespace graphletqa::evidence {

llm::CompletionRequest evidence_request(const qa::QARecord& record, const Document& doc,
                                        const qa::LlmSettings& settings) {
  return {.request_id = "evidence:" + record.graphlet_id + "|" + doc.doc_id,
          .prompt = prompt::evidence_prompt(record.question, record.answer, doc.title, doc.abstract),
          .model = settings.model,
          .decoding = settings.decoding};
}

EvidenceAssessment finalize_assessment(const Document& doc, std::string_view raw) {
  EvidenceAssessment a;
  a.doc_id = doc.doc_id;
  const auto parsed = llm::parse_structured(raw, llm::StageSchema::evidence);
  if (!parsed.ok()) {
    a.parse_failed = true;
    a.reasoning = parsed.failure;
    return a;
  }
  a.relevant = parsed.object->at("relevant").get<bool>();
  a.reasoning = parsed.object->value("reasoning", "");
  if (!a.relevant) return a;
  for (const auto& s : parsed.object->at("snippets")) {
    const auto& text = s.get_ref<const std::string&>();
    if (!text.empty() && doc.abstract.find(text) != std::string::npos) {
      a.snippets.push_back(text);
    } else {
      ++a.dropped_snippets;
      spdlog::debug("document {}: dropped snippet not found verbatim: {:.60}", doc.doc_id, text);
    }
  }
  if (a.snippets.empty()) {
    a.relevant = false;
    a.downgraded = true;
  }
  return a;
}

EvidenceAssessment assess_evidence(llm::Gateway& gateway, const qa::QARecord& record, const Document& doc,
                                   const qa::LlmSettings& settings) {
  const auto result = gateway.complete(evidence_request(record, doc, settings));
  return finalize_assessment(doc, result.text);
}

nlohmann::json to_json(const EvidenceAssessment& a) {
  return {{"doc_id", a.doc_id},
          {"relevant", a.relevant},
          {"snippets", a.snippets},
          {"reasoning", a.reasoning},
          {"parse_failed", a.parse_failed},
          {"dropped_snippets", a.dropped_snippets},
          {"downgraded", a.downgraded}};
}

EvidenceAssessment assessment_from_json(const nlohmann::json& j) {
  EvidenceAssessment a;
  a.doc_id = j.at("doc_id").get<std::string>();
  a.relevant = j.at("relevant").get<bool>();
  a.snippets = j.at("snippets").get<std::vector<std::string>>();
  a.reasoning = j.value("reasoning", "");
  a.parse_failed = j.value("parse_failed", false);
  a.dropped_snippets = j.value("dropped_snippets", std::size_t{0});
  a.downgraded = j.value("downgraded", false);
  return a;
}

nlohmann::json to_json(const EvidenceBundle& b) {
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : b.candidates) candidates.push_back({{"doc_id", c.doc_id}, {"score", c.score}});
  nlohmann::json assessments = nlohmann::json::array();
  for (const auto& a : b.assessments) assessments.push_back(to_json(a));
  return {{"qa_id", b.qa_id},
          {"candidates", candidates},
          {"assessments", assessments},
          {"relevant_count", b.relevant_count}};
}

EvidenceBundle bundle_from_json(const nlohmann::json& j) {
  EvidenceBundle b;
  b.qa_id = j.at("qa_id").get<std::string>();
  for (const auto& c : j.at("candidates")) b.candidates.push_back({c.at("doc_id").get<std::string>(), c.at("score").get<double>()});
  for (const auto& a : j.at("assessments")) b.assessments.push_back(assessment_from_json(a));
  b.relevant_count = j.at("relevant_count").get<std::size_t>();
  return b;
}

void write_bundles_jsonl(const std::filesystem::path& path, std::span<const EvidenceBundle> bundles) {
  std::string out;
  for (const auto& b : bundles) {
    out += util::dump_line(to_json(b));
    out += '\n';
  }
  util::write_text_file(path, out);
}

std::vector<EvidenceBundle> read_bundles_jsonl(const std::filesystem::path& path) {
  std::vector<EvidenceBundle> out;
  util::read_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(bundle_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, line, e.what());
    }
  });
  return out;
}

std::vector<EvidenceBundle> collect_evidence(llm::Gateway& gateway, const Bm25Index& index,
                                             std::span<const Document> corpus, std::span<const qa::QARecord> records,
                                             std::size_t k, const qa::LlmSettings& settings,
                                             util::Checkpoint* checkpoint) {
  std::unordered_map<std::string_view, const Document*> by_id;
  for (const auto& d : corpus) by_id.emplace(d.doc_id, &d);

  std::vector<EvidenceBundle> bundles(records.size());
  struct Item {
    std::size_t bundle;
    const Document* doc;
  };
  std::vector<Item> items;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bundles[i].qa_id = records[i].graphlet_id;
    bundles[i].candidates = retrieve(index, records[i], k);
    for (const auto& c : bundles[i].candidates) {
      const auto it = by_id.find(c.doc_id);
      if (it == by_id.end()) throw LookupError("index document '" + c.doc_id + "' is missing from the corpus");
      items.push_back({i, it->second});
    }
  }

  const auto rows = llm::run_checkpointed(
      gateway, items.size(),
      [&](std::size_t n) { return records[items[n].bundle].graphlet_id + "|" + items[n].doc->doc_id; },
      [&](std::size_t n) { return evidence_request(records[items[n].bundle], *items[n].doc, settings); },
      [&](std::size_t n, const llm::CompletionResult& result) {
        auto j = to_json(finalize_assessment(*items[n].doc, result.text));
        j["key"] = records[items[n].bundle].graphlet_id + "|" + items[n].doc->doc_id;
        return j;
      },
      checkpoint);

  for (std::size_t n = 0; n < items.size(); ++n) {
    auto& b = bundles[items[n].bundle];
    b.assessments.push_back(assessment_from_json(rows[n]));
    b.relevant_count += b.assessments.back().relevant;
  }
  return bundles;
}

BundleStats bundle_stats(std::span<const EvidenceBundle> bundles) {
  BundleStats s;
  s.bundles = bundles.size();
  std::size_t zero = 0, two = 0, five = 0;
  for (const auto& b : bundles) {
    ++s.distribution[b.relevant_count];
    zero += b.relevant_count == 0;
    two += b.relevant_count >= 2;
    five += b.relevant_count >= 5;
    for (const auto& a : b.assessments) {
      s.dropped_snippets += a.dropped_snippets;
      s.downgraded += a.downgraded;
      s.parse_failures += a.parse_failed;
    }
  }
  if (s.bundles) {
    const double n = static_cast<double>(s.bundles);
    s.zero_fraction = zero / n;
    s.at_least_two_fraction = two / n;
    s.at_least_five_fraction = five / n;
  }
  return s;
}

std::string bundle_stats_tsv(const BundleStats& s) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  std::string out = "metric\tvalue\n";
  out += "bundles\t" + std::to_string(s.bundles) + "\n";
  out += "zero_relevant_fraction\t" + fmt(s.zero_fraction) + "\n";
  out += "at_least_two_fraction\t" + fmt(s.at_least_two_fraction) + "\n";
  out += "at_least_five_fraction\t" + fmt(s.at_least_five_fraction) + "\n";
  out += "dropped_snippets\t" + std::to_string(s.dropped_snippets) + "\n";
  out += "downgraded_assessments\t" + std::to_string(s.downgraded) + "\n";
  out += "assessment_parse_failures\t" + std::to_string(s.parse_failures) + "\n";
  for (const auto& [count, bundles] : s.distribution) {
    out += "relevant_count=" + std::to_string(count) + "\t" + std::to_string(bundles) + "\n";
  }
  return out;
}

}  // namespace graphletqa::evidence
