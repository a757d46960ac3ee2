#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace graphletqa::prompt {

// Stage tags carried by every prompt. The mock backend dispatches on them.
inline constexpr std::string_view kGenerationTag = "#GEN";
inline constexpr std::string_view kJudgeTag = "#JUDGE";
inline constexpr std::string_view kEvidenceTag = "#EVIDENCE";
inline constexpr std::string_view kRephraseTag = "#REPHRASE";

/// Coherence check, independent answer attempt and comparison, with a
/// `valid_question` / `original_answer_valid` verdict.
std::string judge_prompt(std::string_view question, std::string_view answer);

/// Relevance classification plus verbatim snippet extraction for one abstract.
std::string evidence_prompt(std::string_view question, std::string_view answer, std::string_view title,
                            std::string_view abstract);

struct RephraseExemplar {
  std::string id;
  /// Pre-rendered exemplar text in the target format.
  std::string rendered;
};

/// format_id is "yes_no" or "multiple_choice".
std::string rephrase_prompt(std::string_view format_id, std::string_view question, std::string_view answer,
                            const std::vector<std::string>& snippets,
                            const std::vector<RephraseExemplar>& exemplars);

/// Extracts the text between `label:\n<<<\n` and `\n>>>`. Empty when absent.
std::string extract_block(std::string_view prompt, std::string_view label);

/// All blocks with the given label, in order.
std::vector<std::string> extract_blocks(std::string_view prompt, std::string_view label);

}  // namespace graphletqa::prompt
