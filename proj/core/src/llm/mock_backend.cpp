#include "graphletqa/llm/mock_backend.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <thread>
#include <vector>

#include "graphletqa/errors.hpp"
#include "graphletqa/prompt/prompts.hpp"
#include "graphletqa/util/hash.hpp"

namespace graphletqa::llm {

namespace {

struct Entity {
  std::string name;
  std::string type;
};

// Reads the `N. name (type)` lines that follow "Entities:".
std::vector<Entity> parse_entities(std::string_view prompt) {
  std::vector<Entity> out;
  auto pos = prompt.find("Entities:\n");
  if (pos == std::string_view::npos) return out;
  pos += 10;
  while (pos < prompt.size()) {
    auto end = prompt.find('\n', pos);
    if (end == std::string_view::npos) end = prompt.size();
    const auto line = prompt.substr(pos, end - pos);
    const auto dot = line.find(". ");
    const auto paren = line.rfind(" (");
    if (dot == std::string_view::npos || paren == std::string_view::npos || paren < dot || line.back() != ')') break;
    out.push_back({std::string(line.substr(dot + 2, paren - dot - 2)),
                   std::string(line.substr(paren + 2, line.size() - paren - 3))});
    pos = end + 1;
  }
  return out;
}

std::uint64_t hash_with(std::string_view salt, std::string_view prompt) {
  std::string key(salt);
  key += '\0';
  key += prompt;
  return util::hash64(key);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string maybe_fence(std::string body, std::uint64_t h) {
  switch (h % 3) {
    case 0: return body;
    case 1: return "```json\n" + body + "\n```";
    default: return "Here is my answer.\n" + body + "\nLet me know if you need anything else.";
  }
}

// Splits text into sentences ending at ". ", keeping the terminator.
std::vector<std::string_view> sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find(". ", start);
    if (end == std::string_view::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, end + 1 - start));
    start = end + 2;
  }
  return out;
}

std::string answer_head(std::string_view answer) {
  auto cut = answer.find_first_of(";,.");
  auto head = std::string(answer.substr(0, cut));
  return head.empty() ? std::string(answer) : head;
}

}  // namespace

MockBackend::MockBackend(MockOptions options) : options_(options) {
  for (double r : {options_.generation_parse_failure, options_.role_violation, options_.judge_rejection,
                   options_.judge_parse_failure, options_.evidence_relevance, options_.paraphrase,
                   options_.rephrase_violation}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("mock rates must lie in [0, 1]");
  }
}

bool MockBackend::decide(std::string_view salt, std::string_view prompt, double rate) {
  const double u = static_cast<double>(hash_with(salt, prompt) >> 11) * 0x1.0p-53;
  return u < rate;
}

std::string MockBackend::respond(std::string_view prompt) const {
  Plant ignored = Plant::none;
  return respond(prompt, ignored);
}

std::string MockBackend::respond(std::string_view prompt, Plant& planted) const {
  planted = Plant::none;
  const std::uint64_t h = util::hash64(prompt);

  if (prompt.find(prompt::kJudgeTag) != std::string_view::npos) {
    if (decide("judge-parse", prompt, options_.judge_parse_failure)) {
      planted = Plant::judge_parse;
      return "The question seems reasonable, and the answer is mostly correct.";
    }
    bool valid_question = true;
    bool answer_valid = true;
    if (decide("judge-reject", prompt, options_.judge_rejection)) {
      planted = Plant::judge_reject;
      ((h >> 7) & 1 ? answer_valid : valid_question) = false;
    }
    nlohmann::json j = {{"reasoning", "Checked the entities, answered independently, compared."},
                        {"valid_question", valid_question},
                        {"original_answer_valid", answer_valid}};
    return maybe_fence(j.dump(), h);
  }

  if (prompt.find(prompt::kEvidenceTag) != std::string_view::npos) {
    const auto abstract = prompt::extract_block(prompt, "Abstract");
    nlohmann::json j = {{"reasoning", "Compared the abstract with the question and answer."},
                        {"relevant", false},
                        {"snippets", nlohmann::json::array()}};
    const auto parts = sentences(abstract);
    if (!parts.empty() && decide("evidence-relevant", prompt, options_.evidence_relevance)) {
      j["relevant"] = true;
      const std::size_t first = h % parts.size();
      const std::size_t count = std::min<std::size_t>(parts.size() - first, 1 + ((h >> 9) & 1));
      const bool paraphrase = decide("evidence-paraphrase", prompt, options_.paraphrase);
      if (paraphrase) planted = Plant::paraphrase;
      for (std::size_t i = first; i < first + count; ++i) {
        std::string snippet(parts[i]);
        if (paraphrase) {
          snippet = "In other words, " + snippet;
          while (abstract.find(snippet) != std::string::npos) snippet += " (restated)";
        }
        j["snippets"].push_back(snippet);
      }
    }
    return maybe_fence(j.dump(), h);
  }

  if (auto tag = prompt.find(prompt::kRephraseTag); tag != std::string_view::npos) {
    const auto line_end = prompt.find('\n', tag);
    const auto format = prompt.substr(tag + prompt::kRephraseTag.size() + 1,
                                      line_end - tag - prompt::kRephraseTag.size() - 1);
    const auto question = prompt::extract_block(prompt, "Question");
    const auto head = answer_head(prompt::extract_block(prompt, "Answer"));
    const bool violate = decide("rephrase-violation", prompt, options_.rephrase_violation);
    if (violate) planted = Plant::rephrase;
    nlohmann::json j;
    if (format == "yes_no") {
      const bool affirm = (h >> 5) & 1;
      j["question"] = affirm ? "Considering the evidence, is " + head + " the answer to the following: " + question
                             : "Considering the evidence, is it incorrect that " + head +
                                   " answers the following: " + question;
      j["label"] = violate ? "maybe" : (affirm ? "yes" : "no");
    } else {
      std::vector<std::string> options = {"None of the listed alternatives", "An unrelated regulatory mechanism",
                                          "The evidence is insufficient to decide"};
      if (std::find(options.begin(), options.end(), head) != options.end()) options[0] = "A different entity";
      const std::size_t correct = h % 4;
      options.insert(options.begin() + static_cast<std::ptrdiff_t>(correct), head);
      const char* letters[] = {"A", "B", "C", "D"};
      nlohmann::json opts = nlohmann::json::object();
      for (std::size_t i = 0; i < options.size(); ++i) opts[letters[i]] = options[i];
      j["question"] = question;
      j["answer"] = letters[correct];
      if (violate) {
        if ((h >> 3) & 1) {
          opts["B"] = opts["A"];
        } else {
          j["answer"] = "E";
        }
      }
      j["options"] = opts;
    }
    return maybe_fence(j.dump(), h);
  }

  if (prompt.find(prompt::kGenerationTag) != std::string_view::npos) {
    const auto entities = parse_entities(prompt);
    if (entities.size() < 2) return "I could not find any entities to work with.";
    if (decide("generation-parse", prompt, options_.generation_parse_failure)) {
      planted = Plant::generation_parse;
      if ((h >> 4) & 1) return "Sure! The question would be about " + entities.front().name + ".";
      return R"({"reasoning": "Linking the entities", "question_nodes": [")" + entities.front().name + R"(")";
    }
    const std::size_t n = entities.size();
    const std::size_t n_question = (n >= 4 && ((h >> 2) & 1)) ? 2 : 1;
    std::vector<std::string> question_nodes;
    std::vector<std::string> hidden_nodes;
    for (std::size_t i = 0; i < n_question; ++i) question_nodes.push_back(entities[i].name);
    for (std::size_t i = n_question; i + 1 < n; ++i) hidden_nodes.push_back(entities[i].name);
    const auto& target = entities.back();
    std::string answer_node = target.name;
    if (decide("generation-role", prompt, options_.role_violation)) {
      planted = Plant::role;
      answer_node = (h >> 6) & 1 ? question_nodes.front() : "Unlisted entity";
    }
    std::string question = "Which " + target.type + " is most closely linked to " + join(question_nodes, " and ") +
                           " through the intermediate biology connecting them?";
    std::string answer = target.name + ". The link runs through " +
                         (hidden_nodes.empty() ? std::string("a direct association") : join(hidden_nodes, ", ")) +
                         ", which connects it to " + join(question_nodes, " and ") + ".";
    nlohmann::json j = {{"reasoning", "Followed the connections from the question entities to the target."},
                        {"question_nodes", question_nodes},
                        {"hidden_nodes", hidden_nodes},
                        {"answer_node", answer_node},
                        {"question", question},
                        {"answer", answer}};
    return maybe_fence(j.dump(), h);
  }

  return "I am not sure what is being asked.";
}

BackendReply MockBackend::send(const CompletionRequest& request) {
  const auto now = ++in_flight_;
  auto seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  struct Leave {
    std::atomic<std::uint64_t>& c;
    ~Leave() { --c; }
  } leave{in_flight_};

  const auto call = ++calls_;
  if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);
  BackendReply reply;
  if (options_.fail_after_calls != 0 && call > options_.fail_after_calls) {
    reply.transport_failed = true;
    reply.http_status = 0;
    reply.error = "mock endpoint unavailable";
    return reply;
  }
  Plant planted = Plant::none;
  reply.text = respond(request.prompt, planted);
  if (planted != Plant::none) ++planted_[static_cast<int>(planted)];
  return reply;
}

MockStats MockBackend::stats() const {
  MockStats s;
  s.calls = calls_;
  s.max_in_flight = max_in_flight_;
  s.planted_generation_parse_failures = planted_[static_cast<int>(Plant::generation_parse)];
  s.planted_role_violations = planted_[static_cast<int>(Plant::role)];
  s.planted_judge_rejections = planted_[static_cast<int>(Plant::judge_reject)];
  s.planted_judge_parse_failures = planted_[static_cast<int>(Plant::judge_parse)];
  s.planted_paraphrases = planted_[static_cast<int>(Plant::paraphrase)];
  s.planted_rephrase_violations = planted_[static_cast<int>(Plant::rephrase)];
  return s;
}

}  // namespace graphletqa::llm
