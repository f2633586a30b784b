#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "graphmark/encoder.hpp"
#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"
#include "support.hpp"

namespace graphmark::encoder {
namespace {

using lang::Program;

const std::vector<std::int64_t> kTrigger = {9, 9};

Program watermarked(std::string_view src, std::int64_t w) {
  return watermark::embed(lang::parse(src), watermark::WatermarkSpec{w, kTrigger});
}

EncodablePredicate never() {
  return [](std::int64_t) { return false; };
}

EncodablePredicate only(std::set<std::int64_t> values) {
  return [values = std::move(values)](std::int64_t x) { return values.contains(x); };
}

std::vector<SplitStep> trace(std::int64_t c, const EncodablePredicate& enc) {
  std::vector<SplitStep> steps;
  split_constant(c, enc, kDefaultSplitDepth, [&](std::int64_t original, const SplitStep& s) {
    if (original == c) steps.push_back(s);
  });
  return steps;
}

bool same(const SplitStep& a, const SplitStep& b) {
  return a.current == b.current && a.even == b.even && a.odd == b.odd;
}

TEST(Select, Examples) {
  EXPECT_TRUE(select_constants(lang::parse("fn main(x) { print(x); }"), {}).empty());
  const Program p = lang::parse("fn main() { print(13); print(6); }");
  EXPECT_EQ(select_constants(p, SelectionPolicy::parse("all")).size(), 2u);
  const auto listed = select_constants(p, SelectionPolicy::parse("list:13"));
  ASSERT_EQ(listed.size(), 1u);
  EXPECT_EQ(listed[0].value, 13);
  EXPECT_EQ(listed[0].location.to_string(), "main:0#0");
}

TEST(Select, TrivialValuesNeedOptIn) {
  const Program p = lang::parse("fn main(x) { y = x * 0 + 1 - -1; print(y + 7); }");
  EXPECT_EQ(select_constants(p, {}).size(), 1u);
  SelectionPolicy all;
  all.include_trivial = true;
  EXPECT_EQ(select_constants(p, all).size(), 4u);
  EXPECT_EQ(select_constants(p, SelectionPolicy::parse("list:1")).size(), 2u);
}

TEST(Select, LocationsAddressNestedStatements) {
  const Program p = lang::parse(
      "fn f(a) { return a * 3; }\n"
      "fn main(x) { if (x > 10) { print(f(x) + 20); } else { while (x < 4) { x = x + 5; } } }");
  std::vector<std::string> where;
  for (const ConstantSite& s : select_constants(p, {})) where.push_back(s.location.to_string());
  EXPECT_EQ(where, (std::vector<std::string>{"f:0#0", "main:0#0", "main:0.0.0#0", "main:0.1.0#0", "main:0.1.0.0.0#0"}));
}

TEST(Select, SkipsGeneratedCodeAndMinInt) {
  const Program p = watermarked("fn main(x, y) { print(-9223372036854775808); print(50); }", 472);
  const auto sites = select_constants(p, {});
  std::vector<std::int64_t> values;
  for (const auto& s : sites) values.push_back(s.value);
  EXPECT_EQ(values, (std::vector<std::int64_t>{9, 9, 50}));
}

TEST(Select, PolicyParsing) {
  EXPECT_EQ(SelectionPolicy::parse("list:13,6,-4").values, (std::vector<std::int64_t>{13, 6, 4}));
  for (std::string_view bad : {"", "some", "list:", "list:1,", "list:x", "list:1,,2"})
    EXPECT_THROW(SelectionPolicy::parse(bad), Error) << bad;
}

TEST(Split, SixTrace) {
  const auto steps = trace(6, never());
  const std::vector<SplitStep> expect = {{6, 1, 0}, {3, 2, 0}, {2, 2, 2}, {1, 4, 2}};
  ASSERT_EQ(steps.size(), expect.size());
  for (std::size_t i = 0; i < steps.size(); ++i) EXPECT_TRUE(same(steps[i], expect[i])) << i;
}

TEST(Split, SixDecomposesAsFourTimesOnePlusTwo) {
  const SplitResult r = split_constant(6, only({1, 2, 4}), kDefaultSplitDepth);
  // With 2 encodable the loop stops at current=2; without it the full trace is used.
  const SplitResult full = split_constant(6, only({1, 4}), kDefaultSplitDepth);
  ASSERT_EQ(full.expr.kind, EncodedExpr::Kind::Add);
  const EncodedExpr& product = full.expr.operands[0];
  ASSERT_EQ(product.kind, EncodedExpr::Kind::Mul);
  EXPECT_EQ(product.operands[0], EncodedExpr::lookup(4));
  EXPECT_EQ(product.operands[1], EncodedExpr::lookup(1));
  EXPECT_EQ(full.expr.operands[1].evaluate(), 2);
  EXPECT_EQ(full.expr.evaluate(), 6);
  EXPECT_EQ(r.expr.evaluate(), 6);
}

TEST(Split, ThirteenTrace) {
  const auto steps = trace(13, never());
  ASSERT_FALSE(steps.empty());
  EXPECT_TRUE(same(steps.back(), {1, 8, 5}));
  const SplitResult r = split_constant(13, only({1, 5, 8}), kDefaultSplitDepth);
  EXPECT_EQ(r.expr, EncodedExpr::add(EncodedExpr::mul(EncodedExpr::lookup(8), EncodedExpr::lookup(1)),
                                     EncodedExpr::lookup(5)));
}

TEST(Split, ZeroAndOneAreLiterals) {
  EXPECT_EQ(split_constant(0, never()).expr, EncodedExpr::literal(0));
  EXPECT_EQ(split_constant(1, never()).expr, EncodedExpr::literal(1));
  EXPECT_EQ(split_constant(0, only({0})).expr, EncodedExpr::lookup(0));
}

TEST(Split, DirectHitIsSingleLookup) { EXPECT_EQ(split_constant(472, only({472})).expr, EncodedExpr::lookup(472)); }

TEST(Split, WithoutLookupsCollapsesToLiteral) {
  for (std::int64_t c : {2, 6, 13, 1000, 65535}) EXPECT_EQ(split_constant(c, never()).expr, EncodedExpr::literal(c));
}

TEST(Split, DepthCapLeavesLiteralAndFlags) {
  // 12 ends at (1, 8, 4); both components need a further level to reach a lookup.
  const SplitResult capped = split_constant(12, only({1}), 0);
  EXPECT_TRUE(capped.depth_capped);
  EXPECT_EQ(capped.expr.evaluate(), 12);
  const SplitResult deep = split_constant(12, only({1}), kDefaultSplitDepth);
  EXPECT_FALSE(deep.depth_capped);
  EXPECT_EQ(deep.expr.evaluate(), 12);
  EXPECT_GT(deep.expr.lookup_count(), capped.expr.lookup_count());
}

TEST(Split, InvariantAndExactnessOnSmallRange) {
  const EncodablePredicate hashed = [](std::int64_t x) { return testing::mix(static_cast<std::uint64_t>(x)) % 5 == 0; };
  for (const EncodablePredicate& enc : {never(), hashed}) {
    for (std::int64_t c = 0; c <= (1 << 14); ++c) {
      bool held = true;
      const SplitResult r = split_constant(c, enc, kDefaultSplitDepth, [&](std::int64_t original, const SplitStep& s) {
        held = held && s.even * s.current + s.odd == original;
      });
      ASSERT_TRUE(held) << c;
      ASSERT_EQ(r.expr.evaluate(), c) << c;
    }
  }
}

TEST(Split, RejectsNegative) { EXPECT_THROW(split_constant(-1, never()), Error); }

TEST(SubtreeIndex, FindsCherryAndLeaf) {
  const ppct::PlaneTree t = ppct::PlaneTree::parse("(*((**)*))");
  SubtreeIndex index(t);
  EXPECT_EQ(index.find(0), ppct::TreePath::parse("L"));
  EXPECT_EQ(index.find(1), ppct::TreePath::parse("RL"));
  EXPECT_EQ(index.find(ppct::rank(t)), ppct::TreePath());
  EXPECT_FALSE(index.encodable(ppct::rank(ppct::PlaneTree::parse("(*(**))"))));
  EXPECT_FALSE(index.encodable(-3));
  EXPECT_FALSE(index.encodable(std::numeric_limits<std::int64_t>::max()));
}

TEST(Plan, WholeTreeIsEmptyPath) {
  const Program p = watermarked("fn main(x, y) { print(472); }", 472);
  const EncodingPlan plan = plan_encoding(p, ppct::unrank(472), select_constants(p, SelectionPolicy::parse("list:472")));
  ASSERT_EQ(plan.entries.size(), 1u);
  EXPECT_EQ(plan.entries[0].expr, EncodedExpr::lookup(472, ppct::TreePath()));
}

TEST(Plan, OneMapsToFirstCherry) {
  for (std::int64_t w : {1, 5, 22, 472, 9000}) {
    const ppct::PlaneTree t = ppct::unrank(w);
    const EncodingPlan plan = plan_encoding({}, t, {{{"main", {0}, 0}, 1}});
    ASSERT_EQ(plan.entries[0].expr.kind, EncodedExpr::Kind::Lookup);
    // First internal node in preorder whose children are both leaves.
    std::optional<ppct::PlaneTree::NodeId> cherry;
    for (ppct::PlaneTree::NodeId n = 0; n < t.node_count() && !cherry; ++n)
      if (!t.is_leaf(n) && t.is_leaf(t.left(n)) && t.is_leaf(t.right(n))) cherry = n;
    EXPECT_EQ(t.node_at(plan.entries[0].expr.path), cherry) << w;
  }
}

TEST(Plan, UnencodableSiteIsFlagged) {
  const EncodingPlan plan = plan_encoding({}, ppct::PlaneTree::leaf(), {{{"main", {0}, 0}, 1}});
  EXPECT_TRUE(plan.entries[0].unprotected);
  EXPECT_EQ(plan.entries[0].expr.evaluate(), 1);
  EXPECT_EQ(plan.protected_sites(), 0u);
}

TEST(Plan, LookupsDecodeToExpectedValues) {
  const ppct::PlaneTree t = ppct::unrank(472);
  for (const auto& entry : testing::demo_corpus()) {
    const Program wm = watermark::embed(entry.program, {472, kTrigger});
    const EncodingPlan plan = plan_encoding(wm, t, select_constants(wm, {}));
    for (const SiteEncoding& e : plan.entries) {
      const std::int64_t magnitude = e.site.value < 0 ? -e.site.value : e.site.value;
      EXPECT_EQ(e.expr.evaluate(), magnitude);
      const auto truth = [&](const EncodedExpr& lookup) { return ppct::rank(t.subtree(*t.node_at(lookup.path))); };
      EXPECT_EQ(e.expr.evaluate(truth), magnitude) << e.site.location.to_string();
    }
  }
}

TEST(Plan, Deterministic) {
  const Program wm = watermarked("fn main(x, y) { print(x * 1234 + y * 77 - 5); }", 472);
  const auto sites = select_constants(wm, {});
  EXPECT_EQ(plan_encoding(wm, ppct::unrank(472), sites), plan_encoding(wm, ppct::unrank(472), sites));
}

TEST(Support, ByteIdenticalAndSized) {
  const auto a = gen_runtime_support();
  const auto b = gen_runtime_support();
  EXPECT_EQ(a, b);
  std::size_t bytes = 0;
  for (const auto& f : a) bytes += lang::serialize(f).size() + 1;
  EXPECT_EQ(support_size(), bytes);
  for (const auto& f : a) EXPECT_TRUE(f.name.starts_with("__tp_"));
}

TEST(Support, RankAgreesWithCodecOnEverySubtree) {
  for (std::size_t k = 1; k <= 6; ++k) {
    for (const ppct::PlaneTree& t : testing::enumerate_trees(k)) {
      const std::int64_t w = ppct::rank(t);
      Program p = watermark::embed(lang::parse("fn main(x) { }"), {w, {1}});
      std::vector<std::int64_t> expect;
      auto& body = p.find("main")->body;
      for (ppct::PlaneTree::NodeId n = 0; n < t.node_count(); ++n) {
        body.push_back(lang::Stmt::print(
            lang::Expr::call("__tp_decode", {lang::Expr::integer(t.path_to(n).pathcode())})));
        expect.push_back(ppct::rank(t.subtree(n)));
      }
      for (auto& f : gen_runtime_support()) p.functions.push_back(std::move(f));
      lang::validate(p);
      const lang::RunResult r = lang::interpret(p, std::vector<std::int64_t>{0});
      ASSERT_TRUE(r.ok()) << r.error_detail;
      std::vector<std::string> want;
      for (std::int64_t v : expect) want.push_back(std::to_string(v));
      ASSERT_EQ(r.output, want) << t.to_string();
    }
  }
}

TEST(Rewrite, EmptyPlanIsIdentity) {
  const Program wm = watermarked("fn main(x, y) { print(13); }", 472);
  EXPECT_EQ(rewrite(wm, {}), wm);
}

TEST(Rewrite, FullLookupSite) {
  const Program wm = watermarked("fn main(x, y) { print(13); }", 13);
  const EncodingPlan plan = plan_encoding(wm, ppct::unrank(13), select_constants(wm, SelectionPolicy::parse("list:13")));
  const Program tp = rewrite(wm, plan);
  EXPECT_NE(lang::serialize(*tp.find("main")).find("\n  print(__tp_decode(1));\n}"), std::string::npos);
  EXPECT_EQ(lang::interpret(tp, std::vector<std::int64_t>{0, 0}).output, std::vector<std::string>{"13"});
}

TEST(Rewrite, NegativeLiteral) {
  const Program wm = watermarked("fn main(x, y) { print(x - -13); }", 13);
  const Protection p = protect(wm, kTrigger, SelectionPolicy::parse("list:13"));
  ASSERT_EQ(p.plan.entries.size(), 1u);
  EXPECT_TRUE(p.plan.entries[0].negated);
  EXPECT_NE(lang::serialize(*p.program.find("main")).find("\n  print(x - -__tp_decode(1));\n}"), std::string::npos);
  EXPECT_EQ(lang::interpret(p.program, std::vector<std::int64_t>{2, 0}).output, std::vector<std::string>{"15"});
}

TEST(Rewrite, SiteDrift) {
  const Program wm = watermarked("fn main(x, y) { print(13); }", 13);
  const EncodingPlan plan = plan_encoding(wm, ppct::unrank(13), select_constants(wm, SelectionPolicy::parse("list:13")));
  const Program other = watermarked("fn main(x, y) { print(14); }", 13);
  EXPECT_THROW(rewrite(other, plan), SiteDriftError);
  EncodingPlan moved = plan;
  moved.entries[0].site.location.path = {7};
  EXPECT_THROW(rewrite(wm, moved), SiteDriftError);
}

TEST(Rewrite, NeedsWatermark) {
  const Program plain = lang::parse("fn main(x, y) { print(13); }");
  const EncodingPlan plan = plan_encoding(plain, ppct::unrank(13), select_constants(plain, {}));
  EXPECT_THROW(rewrite(plain, plan), Error);
  EXPECT_THROW(protect(plain, kTrigger, {}), Error);
}

TEST(Rewrite, PreservesCorpusOutput) {
  for (const auto& entry : testing::demo_corpus()) {
    const Program wm = watermark::embed(entry.program, {472, kTrigger});
    const Protection p = protect(wm, kTrigger, {});
    EXPECT_GT(p.plan.protected_sites(), 0u) << entry.name;
    EXPECT_EQ(testing::outputs(p.program, entry.inputs), testing::outputs(wm, entry.inputs)) << entry.name;
    EXPECT_EQ(watermark::extract(p.program, kTrigger).value, 472);
  }
}

TEST(Rewrite, CodeSizeDecomposes) {
  for (const auto& entry : testing::demo_corpus()) {
    const Program wm = watermark::embed(entry.program, {472, kTrigger});
    const Protection p = protect(wm, kTrigger, {});
    std::int64_t sites = 0;
    for (const auto& e : p.plan.entries) sites += site_delta(e);
    EXPECT_EQ(static_cast<std::int64_t>(lang::code_size(p.program)) - static_cast<std::int64_t>(lang::code_size(wm)),
              static_cast<std::int64_t>(support_size()) + sites)
        << entry.name;
  }
}

TEST(Rewrite, TreeMutationBreaksProtectedOutput) {
  const Program wm = watermarked("fn main(x, y) { print(x * 100 + 37); }", 472);
  const Program tp = protect(wm, kTrigger, {}).program;
  Program bad = tp;
  // Point the root's left child at the root: decoding now recurses forever.
  for (auto& s : bad.find("__wm_build")->body) {
    if (s.kind == lang::Stmt::Kind::FieldStore && s.name == "n0" && s.field == lang::Field::Left) {
      s.expr = lang::Expr::var("n0");
      break;
    }
  }
  EXPECT_NE(testing::outputs(bad, {{1, 2}}), testing::outputs(tp, {{1, 2}}));
}

TEST(PlanJson, DescribesSites) {
  const Program wm = watermarked("fn main(x, y) { print(13); print(-6); }", 472);
  const Protection p = protect(wm, kTrigger, {});
  const auto doc = nlohmann::json::parse(plan_to_json(p.plan));
  ASSERT_EQ(doc.at("sites").size(), p.plan.entries.size());
  const auto& last = doc.at("sites").back();
  EXPECT_EQ(last.at("value"), -6);
  EXPECT_EQ(last.at("negated"), true);
  EXPECT_EQ(last.at("location"), "main:3#0");
  EXPECT_EQ(doc.at("support_bytes"), support_size());
  EXPECT_EQ(plan_to_json(p.plan), plan_to_json(p.plan));
}

}  // namespace
}  // namespace graphmark::encoder
