#include "graphletqa/rephrase.hpp"

#include <algorithm>
#include <set>
#include <spdlog/spdlog.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/llm/structured.hpp"
#include "graphletqa/prompt/prompts.hpp"
#include "graphletqa/util/io.hpp"
#include "graphletqa/util/random.hpp"

namespace graphletqa::rephrase {

namespace {

constexpr std::string_view kLetters[] = {"A", "B", "C", "D", "E"};

// Checks option keys A..D or A..E, non-empty and pairwise distinct values,
// and that `answer` names one of them.
std::vector<std::string> check_options(const std::map<std::string, std::string>& options, const std::string& answer) {
  std::vector<std::string> v;
  const std::size_t n = options.count("E") ? 5 : 4;
  for (const auto& [key, value] : options) {
    if (std::find(std::begin(kLetters), std::begin(kLetters) + n, key) == std::begin(kLetters) + n) {
      v.push_back("unexpected option key '" + key + "'");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string letter(kLetters[i]);
    const auto it = options.find(letter);
    if (it == options.end()) {
      v.push_back("option " + letter + " is missing");
    } else if (it->second.find_first_not_of(" \t\r\n") == std::string::npos) {
      v.push_back("option " + letter + " is empty");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = options.find(std::string(kLetters[i]));
      const auto b = options.find(std::string(kLetters[j]));
      if (a != options.end() && b != options.end() && !a->second.empty() && a->second == b->second) {
        v.push_back("options " + a->first + " and " + b->first + " are duplicates");
      }
    }
  }
  if (std::find(std::begin(kLetters), std::begin(kLetters) + n, answer) == std::begin(kLetters) + n) {
    v.push_back("answer '" + answer + "' is not one of the options A-" + std::string(kLetters[n - 1]));
  }
  return v;
}

std::string string_field(const nlohmann::json& j, const char* name, const std::filesystem::path& path,
                         std::size_t line) {
  const auto it = j.find(name);
  if (it == j.end() || !it->is_string()) {
    throw ParseError(path, line, std::string("field '") + name + "' missing or not a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string_view to_string(FormatId format) {
  return format == FormatId::yes_no ? "yes_no" : "multiple_choice";
}

FormatId format_from_string(std::string_view name) {
  if (name == "yes_no") return FormatId::yes_no;
  if (name == "multiple_choice") return FormatId::multiple_choice;
  throw ConfigError("unknown target format '" + std::string(name) + "'");
}

std::string render(const Exemplar& e, FormatId format) {
  if (format == FormatId::yes_no) {
    return "Context: " + e.context + "\nQuestion: " + e.question + "\nLabel: " + e.label;
  }
  std::string out = "Question: " + e.question + "\n";
  for (const auto& [letter, text] : e.options) out += letter + ". " + text + "\n";
  return out + "Answer: " + e.answer;
}

const Exemplar& ExemplarSet::get(std::string_view id) const {
  const auto it = std::lower_bound(exemplars.begin(), exemplars.end(), id,
                                   [](const Exemplar& e, std::string_view key) { return e.id < key; });
  if (it == exemplars.end() || it->id != id) throw LookupError("unknown exemplar '" + std::string(id) + "'");
  return *it;
}

ExemplarSet index_examples(const std::filesystem::path& path, FormatId format) {
  ExemplarSet set;
  set.format = format;
  util::read_jsonl(path, [&](const nlohmann::json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(path, line, "expected a JSON object");
    Exemplar e;
    e.id = string_field(j, "id", path, line);
    e.question = string_field(j, "question", path, line);
    if (e.id.empty() || e.question.empty()) throw ParseError(path, line, "id and question must be non-empty");
    if (format == FormatId::yes_no) {
      e.context = string_field(j, "context", path, line);
      e.label = string_field(j, "label", path, line);
      if (e.label != "yes" && e.label != "no") throw ParseError(path, line, "label must be 'yes' or 'no'");
    } else {
      const auto it = j.find("options");
      if (it == j.end() || !it->is_object()) throw ParseError(path, line, "field 'options' missing or not an object");
      for (const auto& [key, value] : it->items()) {
        if (!value.is_string()) throw ParseError(path, line, "option " + key + " is not a string");
        e.options[key] = value.get<std::string>();
      }
      e.answer = string_field(j, "answer", path, line);
      if (auto v = check_options(e.options, e.answer); !v.empty()) throw ParseError(path, line, v.front());
    }
    set.exemplars.push_back(std::move(e));
  });
  std::sort(set.exemplars.begin(), set.exemplars.end(), [](const Exemplar& a, const Exemplar& b) { return a.id < b.id; });
  std::vector<evidence::Bm25Index::Entry> entries;
  for (const auto& e : set.exemplars) entries.push_back({e.id, e.question});
  set.index = evidence::Bm25Index::build(std::move(entries));
  return set;
}

std::vector<std::string> validate_format(const RephrasedQA& r) {
  std::vector<std::string> v;
  if (r.source_qa_id.empty()) v.push_back("missing source qa id");
  if (r.question.find_first_not_of(" \t\r\n") == std::string::npos) v.push_back("question is empty");
  if (r.format == FormatId::yes_no) {
    if (r.label != "yes" && r.label != "no") v.push_back("label '" + r.label + "' is not yes or no");
    if (r.context.empty()) v.push_back("context is empty");
  } else {
    auto opt = check_options(r.options, r.answer);
    v.insert(v.end(), opt.begin(), opt.end());
  }
  return v;
}

nlohmann::json to_json(const RephrasedQA& r) {
  nlohmann::json j = {{"source_qa_id", r.source_qa_id}, {"format", to_string(r.format)}, {"question", r.question}};
  if (r.format == FormatId::yes_no) {
    j["context"] = r.context;
    j["label"] = r.label;
  } else {
    j["options"] = r.options;
    j["answer"] = r.answer;
  }
  j["exemplar_ids"] = r.exemplar_ids;
  return j;
}

RephrasedQA rephrased_from_json(const nlohmann::json& j) {
  RephrasedQA r;
  r.source_qa_id = j.at("source_qa_id").get<std::string>();
  r.format = format_from_string(j.at("format").get<std::string>());
  r.question = j.at("question").get<std::string>();
  r.context = j.value("context", "");
  r.label = j.value("label", "");
  r.options = j.value("options", std::map<std::string, std::string>{});
  r.answer = j.value("answer", "");
  r.exemplar_ids = j.value("exemplar_ids", std::vector<std::string>{});
  return r;
}

std::string assemble_context(const qa::QARecord& qa, const evidence::EvidenceBundle& bundle) {
  std::string context;
  for (const auto& a : bundle.assessments) {
    for (const auto& s : a.snippets) {
      if (!context.empty()) context += ' ';
      context += s;
    }
  }
  return context.empty() ? qa.answer : context;
}

std::vector<std::string> select_exemplars(const ExemplarSet& set, const qa::QARecord& qa, std::size_t n) {
  std::vector<std::string> ids;
  const auto terms = evidence::analyze(qa.question + " " + qa.answer);
  for (const auto& hit : set.index.top_k(terms, n)) ids.push_back(hit.doc_id);
  // Too few lexical matches: pad in id order so every prompt gets n examples.
  for (const auto& e : set.exemplars) {
    if (ids.size() >= n) break;
    if (std::find(ids.begin(), ids.end(), e.id) == ids.end()) ids.push_back(e.id);
  }
  return ids;
}

llm::CompletionRequest rephrase_request(const qa::QARecord& qa, const evidence::EvidenceBundle& bundle,
                                        const ExemplarSet& set, std::span<const std::string> exemplar_ids,
                                        const qa::LlmSettings& settings) {
  std::vector<std::string> snippets;
  for (const auto& a : bundle.assessments) snippets.insert(snippets.end(), a.snippets.begin(), a.snippets.end());
  std::vector<prompt::RephraseExemplar> shown;
  for (const auto& id : exemplar_ids) shown.push_back({id, render(set.get(id), set.format)});
  return {.request_id = "rephrase:" + std::string(to_string(set.format)) + ":" + qa.graphlet_id,
          .prompt = prompt::rephrase_prompt(to_string(set.format), qa.question, qa.answer, snippets, shown),
          .model = settings.model,
          .decoding = settings.decoding};
}

RephraseOutcome finalize_rephrase(const qa::QARecord& qa, const evidence::EvidenceBundle& bundle, FormatId format,
                                  std::vector<std::string> exemplar_ids, std::string_view raw) {
  RephraseOutcome out;
  out.qa_id = qa.graphlet_id;
  out.raw = std::string(raw);
  const auto schema = format == FormatId::yes_no ? llm::StageSchema::rephrase_yes_no : llm::StageSchema::rephrase_mcq;
  const auto parsed = llm::parse_structured(raw, schema);
  if (!parsed.ok()) {
    out.violations.push_back(parsed.failure);
    return out;
  }
  RephrasedQA r;
  r.source_qa_id = qa.graphlet_id;
  r.format = format;
  r.exemplar_ids = std::move(exemplar_ids);
  r.question = parsed.object->at("question").get<std::string>();
  if (format == FormatId::yes_no) {
    r.label = parsed.object->at("label").get<std::string>();
    r.context = assemble_context(qa, bundle);
  } else {
    for (const auto& [key, value] : parsed.object->at("options").items()) {
      if (!value.is_string()) {
        out.violations.push_back("option " + key + " is not a string");
        continue;
      }
      r.options[key] = value.get<std::string>();
    }
    r.answer = parsed.object->at("answer").get<std::string>();
  }
  auto v = validate_format(r);
  out.violations.insert(out.violations.end(), v.begin(), v.end());
  if (out.violations.empty()) out.record = std::move(r);
  return out;
}

RephraseOutcome rephrase(llm::Gateway& gateway, const qa::QARecord& qa, const evidence::EvidenceBundle& bundle,
                         const ExemplarSet& set, std::size_t n_examples, const qa::LlmSettings& settings) {
  if (qa.status != qa::Status::accepted) {
    throw ConfigError("record " + qa.graphlet_id + " is not accepted and cannot be rephrased");
  }
  auto ids = select_exemplars(set, qa, n_examples);
  const auto result = gateway.complete(rephrase_request(qa, bundle, set, ids, settings));
  return finalize_rephrase(qa, bundle, set.format, std::move(ids), result.text);
}

std::vector<RephraseOutcome> rephrase_all(llm::Gateway& gateway, std::span<const qa::QARecord> records,
                                          std::span<const evidence::EvidenceBundle> bundles, const ExemplarSet& set,
                                          std::size_t n_examples, const qa::LlmSettings& settings,
                                          util::Checkpoint* checkpoint) {
  if (records.size() != bundles.size()) throw ConfigError("each record needs exactly one evidence bundle");
  std::vector<std::vector<std::string>> exemplar_ids(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].status != qa::Status::accepted) {
      throw ConfigError("record " + records[i].graphlet_id + " is not accepted and cannot be rephrased");
    }
    if (bundles[i].qa_id != records[i].graphlet_id) {
      throw ConfigError("evidence bundle " + bundles[i].qa_id + " does not belong to " + records[i].graphlet_id);
    }
    exemplar_ids[i] = select_exemplars(set, records[i], n_examples);
  }
  const auto rows = llm::run_checkpointed(
      gateway, records.size(), [&](std::size_t i) { return records[i].graphlet_id; },
      [&](std::size_t i) { return rephrase_request(records[i], bundles[i], set, exemplar_ids[i], settings); },
      [&](std::size_t i, const llm::CompletionResult& result) {
        const auto o = finalize_rephrase(records[i], bundles[i], set.format, exemplar_ids[i], result.text);
        nlohmann::json j = {{"qa_id", o.qa_id}, {"violations", o.violations}, {"raw", o.raw}};
        j["record"] = o.record ? to_json(*o.record) : nlohmann::json(nullptr);
        return j;
      },
      checkpoint);
  std::vector<RephraseOutcome> out;
  out.reserve(rows.size());
  for (const auto& j : rows) {
    RephraseOutcome o;
    o.qa_id = j.at("qa_id").get<std::string>();
    o.violations = j.at("violations").get<std::vector<std::string>>();
    o.raw = j.value("raw", "");
    if (j.at("record").is_object()) o.record = rephrased_from_json(j.at("record"));
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<std::size_t> select_subset(std::size_t count, std::size_t size, std::uint64_t seed) {
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = i;
  if (size == 0 || size >= count) return idx;
  util::Rng rng(util::derive_seed(seed, 0x7E9A));
  rng.shuffle(idx.begin(), idx.end());
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string failures_tsv(std::span<const RephraseOutcome> outcomes, FormatId format) {
  std::string out = "qa_id\tformat\tviolation\n";
  for (const auto& o : outcomes) {
    for (auto v : o.violations) {
      // Violations can quote model output; keep one row per violation.
      std::replace_if(v.begin(), v.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
      out += o.qa_id + "\t" + std::string(to_string(format)) + "\t" + v + "\n";
    }
  }
  return out;
}

}  // namespace graphletqa::rephrase
