#include <cmath>
#include <spdlog/spdlog.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/llm/structured.hpp"
#include "graphletqa/prompt/prompts.hpp"
#include "graphletqa/qa.hpp"
#include "graphletqa/util/utf8.hpp"

namespace graphletqa::qa {

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

FilterResult structural_filter(std::span<const QARecord> records) {
  FilterResult out;
  for (const auto& r : records) {
    (r.status == Status::parse_failed ? out.removed : out.kept).push_back(r);
  }
  return out;
}

FieldBounds field_bounds(std::span<const std::size_t> lengths, double z) {
  if (lengths.size() < 2) throw InsufficientDataError("length bounds need at least two records");
  if (!(z > 0.0)) throw ConfigError("z threshold must be positive");
  // Integer sums keep the statistics independent of record order.
  u128 sum = 0;
  u128 sum_sq = 0;
  for (auto len : lengths) {
    sum += len;
    sum_sq += static_cast<u128>(len) * len;
  }
  const auto n = static_cast<u128>(lengths.size());
  const u128 spread = n * sum_sq - sum * sum;  // n^2 * variance, never negative

  FieldBounds b;
  b.count = lengths.size();
  b.mean = static_cast<double>(static_cast<long double>(sum) / static_cast<long double>(n));
  b.stddev = static_cast<double>(std::sqrt(static_cast<long double>(spread)) / static_cast<long double>(n));
  if (spread == 0) {
    b.lo = b.hi = static_cast<std::size_t>(sum / n);
    return b;
  }
  const double lo = std::ceil(b.mean - z * b.stddev);
  const double hi = std::floor(b.mean + z * b.stddev);
  b.lo = lo < 1.0 ? 1 : static_cast<std::size_t>(lo);
  b.hi = hi < 0.0 ? 0 : static_cast<std::size_t>(hi);
  return b;
}

LengthBounds compute_length_bounds(std::span<const QARecord> records, double z) {
  if (records.size() < 2) {
    throw InsufficientDataError("length bounds need at least two records, got " + std::to_string(records.size()));
  }
  std::vector<std::size_t> q;
  std::vector<std::size_t> a;
  q.reserve(records.size());
  a.reserve(records.size());
  for (const auto& r : records) {
    q.push_back(util::scalar_count(r.question));
    a.push_back(util::scalar_count(r.answer));
  }
  return {field_bounds(q, z), field_bounds(a, z), z};
}

FilterResult length_filter(std::span<const QARecord> records, const LengthBounds& bounds) {
  FilterResult out;
  for (const auto& r : records) {
    if (bounds.question.contains(util::scalar_count(r.question)) &&
        bounds.answer.contains(util::scalar_count(r.answer))) {
      out.kept.push_back(r);
    } else {
      auto culled = r;
      culled.status = Status::length_culled;
      out.removed.push_back(std::move(culled));
    }
  }
  return out;
}

nlohmann::json to_json(const LengthBounds& b) {
  auto field = [](const FieldBounds& f) {
    return nlohmann::json{{"lo", f.lo}, {"hi", f.hi}, {"mean", f.mean}, {"stddev", f.stddev}, {"count", f.count}};
  };
  return {{"unit", "unicode_scalar_values"}, {"z", b.z}, {"question", field(b.question)}, {"answer", field(b.answer)}};
}

llm::CompletionRequest judge_request(const QARecord& record, const LlmSettings& settings) {
  return {.request_id = "judge:" + record.graphlet_id,
          .prompt = prompt::judge_prompt(record.question, record.answer),
          .model = settings.model,
          .decoding = settings.decoding};
}

JudgeVerdict parse_verdict(std::string_view raw) {
  JudgeVerdict v;
  v.raw = std::string(raw);
  const auto parsed = llm::parse_structured(raw, llm::StageSchema::judge);
  if (!parsed.ok()) {
    v.parse_failed = true;
    v.reasoning = parsed.failure;
    return v;
  }
  v.valid_question = parsed.object->at("valid_question").get<bool>();
  v.original_answer_valid = parsed.object->at("original_answer_valid").get<bool>();
  v.reasoning = parsed.object->value("reasoning", "");
  return v;
}

QARecord apply_verdict(QARecord record, JudgeVerdict verdict) {
  record.status = verdict.accepts() ? Status::accepted : Status::judge_rejected;
  record.verdict = std::move(verdict);
  return record;
}

QARecord judge(llm::Gateway& gateway, const QARecord& record, const LlmSettings& settings) {
  const auto result = gateway.complete(judge_request(record, settings));
  return apply_verdict(record, parse_verdict(result.text));
}

std::vector<QARecord> judge_all(llm::Gateway& gateway, std::span<const QARecord> records,
                                const LlmSettings& settings, util::Checkpoint* checkpoint) {
  const auto rows = llm::run_checkpointed(
      gateway, records.size(), [&](std::size_t i) { return records[i].graphlet_id; },
      [&](std::size_t i) { return judge_request(records[i], settings); },
      [&](std::size_t i, const llm::CompletionResult& result) {
        return to_json(apply_verdict(records[i], parse_verdict(result.text)));
      },
      checkpoint);
  std::vector<QARecord> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(record_from_json(row));
  return out;
}

}  // namespace graphletqa::qa
