#include <gtest/gtest.h>

#include "graphletqa/errors.hpp"
#include "graphletqa/graphlet/sampling.hpp"
#include "graphletqa/llm/mock_backend.hpp"
#include "graphletqa/prompt/catalog.hpp"
#include "graphletqa/qa.hpp"
#include "oracles.hpp"

using namespace graphletqa;
using namespace graphletqa::qa;

namespace {

graphlet::Graphlet path3() {
  graphlet::Graphlet g;
  g.graphlet_id = "g1";
  g.shape = graphlet::shape_by_ordinal(1);
  g.nodes = {{"a", "gene", "TP53"}, {"b", "disease", "Glioma"}, {"c", "drug", "Temozolomide"}};
  g.edges = graphlet::SmallGraph(3, g.shape.canonical_code).edges();
  return g;
}

std::string gen_json(const std::string& qnodes, const std::string& hidden, const std::string& answer_node,
                     const std::string& q = "What drug?", const std::string& a = "Temozolomide") {
  return R"({"question_nodes": )" + qnodes + R"(, "hidden_nodes": )" + hidden + R"(, "answer_node": ")" +
         answer_node + R"(", "question": ")" + q + R"(", "answer": ")" + a + R"("})";
}

QARecord with_lengths(std::size_t q, std::size_t a, const std::string& id) {
  QARecord r;
  r.graphlet_id = id;
  r.question = std::string(q, 'q');
  r.answer = std::string(a, 'a');
  return r;
}

llm::GatewayOptions no_sleep() {
  llm::GatewayOptions o;
  o.sleep = [](std::chrono::milliseconds) {};
  return o;
}

}  // namespace

TEST(Generation, ValidRolesAccepted) {
  const auto r = record_from_generation(path3(), gen_json(R"(["TP53", "Glioma"])", "[]", "Temozolomide"));
  EXPECT_EQ(r.status, Status::generated);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_EQ(r.shape_ordinal, 1);
  EXPECT_EQ(r.answer_node, "Temozolomide");
}

TEST(Generation, RoleViolationsFoldIntoParseFailed) {
  const auto g = path3();
  const std::vector<std::string> bad = {
      gen_json("[]", "[]", "Temozolomide"),
      gen_json(R"(["TP53", "Glioma", "Temozolomide"])", "[]", "Temozolomide"),
      gen_json(R"(["TP53"])", "[]", "TP53"),
      gen_json(R"(["TP53"])", "[]", "Aspirin"),
      gen_json(R"(["TP53"])", R"(["Unknown"])", "Temozolomide"),
      gen_json(R"(["TP53"])", "[]", "Temozolomide", ""),
      R"({"question": "q"})",
      "I cannot help with that.",
  };
  for (const auto& raw : bad) {
    const auto r = record_from_generation(g, raw);
    EXPECT_EQ(r.status, Status::parse_failed) << raw;
    EXPECT_FALSE(r.violations.empty());
    EXPECT_EQ(r.raw_output, raw);
  }
}

TEST(Generation, MockRunIsDeterministicAndCheckpointed) {
  const auto host = oracle::random_graph(25, 0.25, 4);
  graphlet::SamplingPlan plan;
  plan.target = 3;
  const auto graphlets = graphlet::sample_per_shape(host, plan).graphlets;
  const auto catalog = prompt::PromptCatalog::builtin();
  llm::MockOptions mo;
  mo.generation_parse_failure = 0.2;
  mo.role_violation = 0.1;
  auto run = [&](util::Checkpoint* cp) {
    llm::Gateway gw(std::make_shared<llm::MockBackend>(mo), no_sleep());
    return generate_all(gw, catalog, catalog.full_config(), graphlets, {}, cp);
  };
  oracle::TempDir dir;
  util::Checkpoint cp(dir / "cp.jsonl", "graphlet_id", false);
  const auto a = run(&cp);
  const auto b = run(nullptr);
  ASSERT_EQ(a.size(), graphlets.size());
  std::size_t failed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(to_json(a[i]), to_json(b[i]));
    EXPECT_EQ(a[i].graphlet_id, graphlets[i].graphlet_id);
    failed += a[i].status == Status::parse_failed;
  }
  EXPECT_GT(failed, 0u);
  EXPECT_EQ(cp.size(), graphlets.size());
}

TEST(QaRecords, JsonRoundTrip) {
  QARecord r = record_from_generation(path3(), gen_json(R"(["TP53"])", R"(["Glioma"])", "Temozolomide"));
  r = apply_verdict(r, parse_verdict(R"({"valid_question": true, "original_answer_valid": true, "reasoning": "ok"})"));
  EXPECT_EQ(r.status, Status::accepted);
  oracle::TempDir dir;
  write_records_jsonl(dir / "r.jsonl", std::vector<QARecord>{r});
  const auto back = read_records_jsonl(dir / "r.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(to_json(back[0]), to_json(r));
  EXPECT_EQ(status_from_string("length_culled"), Status::length_culled);
  EXPECT_THROW(status_from_string("bogus"), ConfigError);
}

TEST(Judge, VerdictParsing) {
  const auto ok = parse_verdict(R"(```json
{"reasoning": "fine", "valid_question": true, "original_answer_valid": true}
```)");
  EXPECT_TRUE(ok.accepts());
  EXPECT_EQ(ok.reasoning, "fine");
  EXPECT_FALSE(parse_verdict(R"({"valid_question": true, "original_answer_valid": false})").accepts());
  const auto broken = parse_verdict("Looks good to me.");
  EXPECT_TRUE(broken.parse_failed);
  EXPECT_FALSE(broken.accepts());
  auto r = apply_verdict(with_lengths(3, 3, "x"), broken);
  EXPECT_EQ(r.status, Status::judge_rejected);
  ASSERT_TRUE(r.verdict);
  EXPECT_TRUE(r.verdict->parse_failed);
}

TEST(Filters, StructuralSplitsParseFailures) {
  std::vector<QARecord> records = {with_lengths(3, 3, "a"), with_lengths(3, 3, "b")};
  records[1].status = Status::parse_failed;
  const auto f = structural_filter(records);
  ASSERT_EQ(f.kept.size(), 1u);
  EXPECT_EQ(f.kept[0].graphlet_id, "a");
  ASSERT_EQ(f.removed.size(), 1u);
  EXPECT_EQ(f.removed[0].status, Status::parse_failed);
}

TEST(Filters, FieldBoundsAgainstOracle) {
  const std::vector<std::size_t> lengths = {10, 12, 9, 11, 10, 50, 10, 8};
  const auto [mean, sd] = oracle::mean_stddev(std::vector<double>(lengths.begin(), lengths.end()));
  const auto b = field_bounds(lengths, 1.0);
  EXPECT_NEAR(b.mean, mean, 1e-12);
  EXPECT_NEAR(b.stddev, sd, 1e-12);
  EXPECT_EQ(b.count, lengths.size());
  for (std::size_t l = 0; l < 80; ++l) {
    EXPECT_EQ(b.contains(l), l >= 1 && std::abs(static_cast<double>(l) - mean) <= sd) << l;
  }
}

TEST(Filters, ZeroSigmaKeepsEverything) {
  std::vector<QARecord> records;
  for (int i = 0; i < 5; ++i) records.push_back(with_lengths(7, 4, "r" + std::to_string(i)));
  const auto bounds = compute_length_bounds(records);
  EXPECT_EQ(bounds.question.lo, 7u);
  EXPECT_EQ(bounds.question.hi, 7u);
  const auto f = length_filter(records, bounds);
  EXPECT_EQ(f.kept.size(), 5u);
  EXPECT_TRUE(f.removed.empty());
}

TEST(Filters, LengthCountsScalars) {
  std::vector<QARecord> records;
  for (int i = 0; i < 4; ++i) records.push_back(with_lengths(4, 4, "r" + std::to_string(i)));
  records[0].question = "\xCE\xB2\xCE\xB2\xCE\xB2\xCE\xB2";  // four scalars, eight bytes
  const auto bounds = compute_length_bounds(records);
  EXPECT_EQ(bounds.question.hi, 4u);
  EXPECT_EQ(length_filter(records, bounds).kept.size(), 4u);
}

TEST(Filters, TooFewRecords) {
  std::vector<QARecord> one = {with_lengths(3, 3, "a")};
  EXPECT_THROW(compute_length_bounds(one), InsufficientDataError);
  EXPECT_THROW(compute_length_bounds({}), InsufficientDataError);
}

TEST(Filters, CulledRecordsMarked) {
  std::vector<QARecord> records;
  for (int i = 0; i < 30; ++i) records.push_back(with_lengths(20 + i % 3, 10, "r" + std::to_string(i)));
  records.push_back(with_lengths(500, 10, "long"));
  const auto f = length_filter(records, compute_length_bounds(records));
  ASSERT_EQ(f.removed.size(), 1u);
  EXPECT_EQ(f.removed[0].graphlet_id, "long");
  EXPECT_EQ(f.removed[0].status, Status::length_culled);
  const auto j = to_json(compute_length_bounds(records));
  EXPECT_TRUE(j.contains("question"));
  EXPECT_TRUE(j.contains("answer"));
}

TEST(Stats, FunnelAndShapes) {
  std::vector<QARecord> records;
  auto add = [&](Status s, int shape, bool parse_failed_verdict = false) {
    QARecord r = with_lengths(3, 3, "r" + std::to_string(records.size()));
    r.status = s;
    r.shape_ordinal = shape;
    if (s == Status::judge_rejected || s == Status::accepted) {
      r.verdict = JudgeVerdict{};
      r.verdict->parse_failed = parse_failed_verdict;
    }
    records.push_back(r);
  };
  add(Status::parse_failed, 1);
  add(Status::length_culled, 1);
  add(Status::judge_rejected, 2);
  add(Status::judge_rejected, 2, true);
  add(Status::accepted, 2);
  add(Status::accepted, 1);
  const auto report = stage_stats(records);
  const auto& f = report.funnel;
  EXPECT_EQ(f.generated, 6u);
  EXPECT_EQ(f.parse_failed, 1u);
  EXPECT_EQ(f.length_culled, 1u);
  EXPECT_EQ(f.judge_rejected, 1u);
  EXPECT_EQ(f.judge_parse_failed, 1u);
  EXPECT_EQ(f.accepted, 2u);
  EXPECT_TRUE(f.conserved());
  ASSERT_EQ(report.shapes.size(), 2u);
  EXPECT_EQ(report.shapes[0].shape_ordinal, 1);
  EXPECT_EQ(report.shapes[0].generated, 3u);
  EXPECT_DOUBLE_EQ(report.shapes[0].ratio(), 1.0 / 3.0);
  EXPECT_EQ(report.shapes[1].accepted, 1u);
  EXPECT_DOUBLE_EQ(report.shapes[1].ratio(), 1.0 / 3.0);
  EXPECT_NE(funnel_tsv(f).find("accepted\t2"), std::string::npos);
  EXPECT_NE(shape_acceptance_tsv(report.shapes).find("shape_ordinal"), std::string::npos);
}
