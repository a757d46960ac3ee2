#include "graphletqa/prompt/prompts.hpp"

#include "graphletqa/prompt/catalog.hpp"

namespace graphletqa::prompt {

namespace {

std::string block(std::string_view label, std::string_view body) {
  std::string out(label);
  out += ":\n<<<\n";
  out += body;
  out += "\n>>>\n";
  return out;
}

}  // namespace

std::string judge_prompt(std::string_view question, std::string_view answer) {
  std::string p;
  p += "Stage tag: ";
  p += kJudgeTag;
  p += "\n";
  p += "You are a domain expert reviewing a generated question-answer pair. Use your own knowledge; "
       "no other context is available.\n"
       "1. Look at the entities mentioned in the question and how the question connects them. Decide "
       "whether the question is coherent and answerable.\n"
       "2. Answer the question yourself, without looking at the provided answer.\n"
       "3. Compare your answer with the provided answer and decide whether the provided answer is "
       "correct and complete.\n\n";
  p += block("Question", question);
  p += block("Answer", answer);
  p += "\nRespond with exactly one JSON object:\n"
       "{\"reasoning\": string, \"valid_question\": boolean, \"original_answer_valid\": boolean}\n";
  return p;
}

std::string evidence_prompt(std::string_view question, std::string_view answer, std::string_view title,
                            std::string_view abstract) {
  std::string p;
  p += "Stage tag: ";
  p += kEvidenceTag;
  p += "\n";
  p += "Decide whether the document below supports the question-answer pair. If it does, copy the "
       "sentences or phrases that support it. Snippets must be copied character for character from "
       "the abstract; do not rephrase. If the document is not relevant, return an empty list.\n\n";
  p += block("Question", question);
  p += block("Answer", answer);
  p += block("Title", title);
  p += block("Abstract", abstract);
  p += "\nRespond with exactly one JSON object:\n"
       "{\"reasoning\": string, \"relevant\": boolean, \"snippets\": [string]}\n";
  return p;
}

std::string rephrase_prompt(std::string_view format_id, std::string_view question, std::string_view answer,
                            const std::vector<std::string>& snippets,
                            const std::vector<RephraseExemplar>& exemplars) {
  std::string p;
  p += "Stage tag: ";
  p += kRephraseTag;
  p += " ";
  p += format_id;
  p += "\n";
  p += "Rewrite the question-answer pair below as a new item in the target benchmark format. Keep the "
       "scientific content; match the style of the examples.\n\n";
  p += block("Question", question);
  p += block("Answer", answer);
  for (const auto& s : snippets) p += block("Snippet", s);
  for (const auto& e : exemplars) p += block("Example " + e.id, e.rendered);
  p += "\nRespond with exactly one JSON object:\n";
  if (format_id == "yes_no") {
    p += "{\"question\": string (answerable with yes or no), \"label\": \"yes\" | \"no\"}\n";
  } else {
    p += "{\"question\": string, \"options\": {\"A\": string, \"B\": string, \"C\": string, \"D\": string, "
         "\"E\": string (optional)}, \"answer\": one option letter}\n"
         "Options must be distinct and exactly one must be correct.\n";
  }
  return p;
}

std::vector<std::string> extract_blocks(std::string_view prompt, std::string_view label) {
  std::vector<std::string> out;
  const std::string open = std::string(label) + ":\n<<<\n";
  std::size_t pos = 0;
  while ((pos = prompt.find(open, pos)) != std::string_view::npos) {
    if (pos != 0 && prompt[pos - 1] != '\n') {
      pos += open.size();
      continue;
    }
    const auto start = pos + open.size();
    const auto end = prompt.find("\n>>>\n", start);
    if (end == std::string_view::npos) break;
    out.emplace_back(prompt.substr(start, end - start));
    pos = end;
  }
  return out;
}

std::string extract_block(std::string_view prompt, std::string_view label) {
  auto blocks = extract_blocks(prompt, label);
  return blocks.empty() ? std::string() : blocks.front();
}

}  // namespace graphletqa::prompt
