#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "graphmark/bench.hpp"
#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"
#include "support.hpp"

namespace graphmark::bench {
namespace {

BenchConfig demo_config() {
  BenchConfig c;
  c.watermark = testing::kDemoWatermark;
  c.trigger = testing::kDemoTrigger;
  return c;
}

CorpusProgram tiny() {
  return {"tiny", lang::parse("fn main(x, y) { print(x * 100 + y - 37); }"), {{1, 2}, {9, 9}, {-3, 4}}};
}

TEST(Measure, CountsAndIsDeterministic) {
  const lang::Program p = lang::parse("fn main(x) { n = node(); m = node(); print(x); }");
  const Metrics m = measure(p, {{1}, {2}});
  EXPECT_EQ(m.code_size_bytes, lang::code_size(p));
  EXPECT_EQ(m.steps, 6u);
  EXPECT_EQ(m.total_allocations, 4u);
  EXPECT_EQ(m.peak_live_nodes, 4u);
  EXPECT_EQ(measure(p, {{1}, {2}}), m);
}

TEST(Measure, Errors) {
  const lang::Program p = lang::parse("fn main(x) { print(10 / x); }");
  EXPECT_THROW(measure(p, {}), Error);
  EXPECT_THROW(measure(p, {{1}, {0}}), Error);
}

TEST(Compare, SingleProgramReport) {
  const ResilienceReport r = compare({tiny()}, demo_config());
  ASSERT_EQ(r.programs.size(), 1u);
  const ProgramReport& p = r.programs[0];
  EXPECT_FALSE(p.error);
  EXPECT_EQ(p.attacks.size(), attacks::kAllAttacks.size());
  EXPECT_GT(p.protected_sites, 0u);
  EXPECT_TRUE(p.law_holds);
  EXPECT_TRUE(r.law_holds);
  EXPECT_EQ(r.support_bytes, encoder::support_size());
  EXPECT_EQ(static_cast<std::int64_t>(p.tp.code_size_bytes - p.wm.code_size_bytes),
            static_cast<std::int64_t>(r.support_bytes) + p.site_bytes);
  EXPECT_GT(p.tp.steps, p.wm.steps);
}

TEST(Compare, BrokenProgramIsReportedNotThrown) {
  CorpusProgram bad{"bad", lang::parse("fn main(x, y) { print(100 / x); }"), {{0, 1}}};
  const ResilienceReport r = compare({bad, tiny()}, demo_config());
  ASSERT_EQ(r.programs.size(), 2u);
  EXPECT_TRUE(r.programs[0].error);
  EXPECT_FALSE(r.programs[1].error);
}

TEST(Render, StableAndEmpty) {
  const ResilienceReport r = compare({tiny()}, demo_config());
  EXPECT_EQ(render_json(r), render_json(compare({tiny()}, demo_config())));
  EXPECT_EQ(render_markdown(r), render_markdown(r));

  const ResilienceReport empty = compare({}, demo_config());
  const std::string md = render_markdown(empty);
  EXPECT_NE(md.find("| Program |"), std::string::npos);
  EXPECT_EQ(md.find("tiny"), std::string::npos);
}

TEST(Render, JsonRoundTripAndSortedKeys) {
  const ResilienceReport r = compare({tiny()}, demo_config());
  const std::string text = render_json(r);
  EXPECT_EQ(parse_report_json(text), r);
  const auto doc = nlohmann::json::parse(text);
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_THROW(parse_report_json("{"), Error);
  EXPECT_THROW(parse_report_json("[]"), Error);
}

TEST(Render, MarkdownMarksAdaptedAttacks) {
  const std::string md = render_markdown(compare({tiny()}, demo_config()));
  EXPECT_NE(md.find("split_function (adapted)"), std::string::npos);
  EXPECT_NE(md.find("duplicate_variable (adapted)"), std::string::npos);
  EXPECT_EQ(md.find("reorder (adapted)"), std::string::npos);
}

TEST(Inputs, Parsing) {
  const auto m = parse_inputs_json(R"({"a": [[1, 2], [3, 4]], "b": []})");
  EXPECT_EQ(m.at("a"), (Inputs{{1, 2}, {3, 4}}));
  EXPECT_TRUE(m.at("b").empty());
  EXPECT_THROW(parse_inputs_json(R"({"a": [[1.5]]})"), Error);
  EXPECT_THROW(parse_inputs_json("[1]"), Error);
}

TEST(Corpus, LoadsSortedWithInputs) {
  const auto corpus = testing::demo_corpus();
  ASSERT_FALSE(corpus.empty());
  for (std::size_t i = 1; i < corpus.size(); ++i) EXPECT_LT(corpus[i - 1].name, corpus[i].name);
  for (const auto& c : corpus) EXPECT_GE(c.inputs.size(), 10u) << c.name;
}

TEST(Family, CostGrowsWithProtectedConstants) {
  std::vector<CorpusProgram> family;
  for (int k = 0; k <= 5; ++k) {
    const auto path = testing::source_dir() / "tests" / "data" / "family" / ("family_" + std::to_string(k) + ".gm");
    family.push_back({"family_" + std::to_string(k), lang::parse(read_file(path)), {{1, 2}, {3, 4}, {9, 9}}});
  }
  const ResilienceReport r = compare(family, demo_config());
  std::int64_t last_steps = -1;
  std::int64_t last_heap = std::numeric_limits<std::int64_t>::min();
  for (const ProgramReport& p : r.programs) {
    ASSERT_FALSE(p.error) << *p.error;
    const auto steps = static_cast<std::int64_t>(p.tp.steps) - static_cast<std::int64_t>(p.wm.steps);
    const auto heap = static_cast<std::int64_t>(p.tp.peak_live_nodes) - static_cast<std::int64_t>(p.wm.peak_live_nodes);
    EXPECT_GE(steps, last_steps) << p.name;
    EXPECT_GE(heap, last_heap) << p.name;
    last_steps = steps;
    last_heap = heap;
  }
  EXPECT_GT(last_steps, 0);
}

TEST(Golden, DemoReportMarkdown) {
  const ResilienceReport r = compare(testing::demo_corpus(), demo_config());
  EXPECT_EQ(render_markdown(r), read_file(testing::golden_dir() / "report.md"));
}

}  // namespace
}  // namespace graphmark::bench
