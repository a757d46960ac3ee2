#include <cstdio>
#include <map>

#include "graphletqa/qa.hpp"

namespace graphletqa::qa {

StageReport stage_stats(std::span<const QARecord> records) {
  StageReport report;
  std::map<int, ShapeAcceptance> shapes;
  auto& f = report.funnel;
  for (const auto& r : records) {
    ++f.generated;
    auto& s = shapes[r.shape_ordinal];
    s.shape_ordinal = r.shape_ordinal;
    ++s.generated;
    switch (r.status) {
      case Status::generated: ++report.pending; break;
      case Status::parse_failed: ++f.parse_failed; break;
      case Status::length_culled: ++f.length_culled; break;
      case Status::judge_rejected:
        ++(r.verdict && r.verdict->parse_failed ? f.judge_parse_failed : f.judge_rejected);
        break;
      case Status::accepted:
        ++f.accepted;
        ++s.accepted;
        break;
    }
  }
  for (const auto& [ordinal, s] : shapes) report.shapes.push_back(s);
  return report;
}

std::string funnel_tsv(const Funnel& f) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", den ? static_cast<double>(num) / den : 0.0);
    return std::string(buf);
  };
  std::string out = "stage\tcount\n";
  out += "generated\t" + std::to_string(f.generated) + "\n";
  out += "parse_failed\t" + std::to_string(f.parse_failed) + "\n";
  out += "length_culled\t" + std::to_string(f.length_culled) + "\n";
  out += "judge_rejected\t" + std::to_string(f.judge_rejected) + "\n";
  out += "judge_parse_failed\t" + std::to_string(f.judge_parse_failed) + "\n";
  out += "accepted\t" + std::to_string(f.accepted) + "\n";
  out += "acceptance_ratio_of_judged\t" + ratio(f.accepted, f.judged()) + "\n";
  out += "acceptance_ratio_of_parsed_verdicts\t" + ratio(f.accepted, f.judged() - f.judge_parse_failed) + "\n";
  out += "acceptance_ratio_of_generated\t" + ratio(f.accepted, f.generated) + "\n";
  return out;
}

std::string shape_acceptance_tsv(std::span<const ShapeAcceptance> shapes) {
  std::string out = "shape_ordinal\tgenerated\taccepted\tacceptance_ratio\n";
  for (const auto& s : shapes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s.ratio());
    out += std::to_string(s.shape_ordinal) + "\t" + std::to_string(s.generated) + "\t" +
           std::to_string(s.accepted) + "\t" + buf + "\n";
  }
  return out;
}

}  // namespace graphletqa::qa
