#include <gtest/gtest.h>

#include <random>

#include "graphmark/error.hpp"
#include "graphmark/ppct.hpp"
#include "support.hpp"

namespace graphmark::ppct {
namespace {

using testing::enumerate_trees;
using testing::snapshot_of;

// Independent Catalan values: C(n) = binom(2n, n) / (n + 1), exact in 128 bits
// through the multiplicative formula.
std::int64_t binomial_catalan(std::size_t n) {
  __extension__ unsigned __int128 b = 1;
  for (std::size_t i = 1; i <= n; ++i) b = b * (n + i) / i;
  return static_cast<std::int64_t>(b / (n + 1));
}

TEST(Catalan, SmallValues) {
  EXPECT_EQ(catalan(0), 1);
  EXPECT_EQ(catalan(3), 5);
  EXPECT_EQ(catalan(4), 14);
}

TEST(Catalan, CountsEnumeratedShapes) {
  for (std::size_t k = 1; k <= 9; ++k)
    EXPECT_EQ(catalan(k - 1), static_cast<std::int64_t>(enumerate_trees(k).size())) << k << " leaves";
}

TEST(Catalan, MatchesBinomialFormulaUpToInt64Limit) {
  for (std::size_t n = 0; n <= 35; ++n) EXPECT_EQ(catalan(n), binomial_catalan(n)) << n;
  EXPECT_THROW(catalan(36), OverflowError);
}

TEST(Codec, FirstRanks) {
  EXPECT_EQ(unrank(0), PlaneTree::leaf());
  EXPECT_EQ(unrank(1), PlaneTree::parse("(**)"));
  EXPECT_EQ(rank(PlaneTree::leaf()), 0);
  EXPECT_EQ(rank(PlaneTree::parse("(**)")), 1);
}

TEST(Codec, FiveLeafShapesOccupyNineToTwentyTwo) {
  EXPECT_EQ(first_rank_with_leaves(5), 9);
  for (std::int64_t n = 9; n <= 22; ++n) EXPECT_EQ(unrank(n).leaf_count(), 5u) << n;
  EXPECT_EQ(unrank(8).leaf_count(), 4u);
  EXPECT_EQ(unrank(23).leaf_count(), 6u);
  EXPECT_EQ(unrank(13).leaf_count(), 5u);
}

TEST(Codec, AgreesWithEnumerationOrderUpToEightLeaves) {
  std::int64_t expected = 0;
  for (std::size_t k = 1; k <= 8; ++k) {
    ASSERT_EQ(first_rank_with_leaves(k), expected);
    for (const PlaneTree& t : enumerate_trees(k)) {
      ASSERT_EQ(rank(t), expected) << t.to_string();
      ASSERT_EQ(unrank(expected), t) << expected;
      ++expected;
    }
  }
  EXPECT_EQ(expected, 1 + 1 + 2 + 5 + 14 + 42 + 132 + 429);
}

TEST(Codec, LeafCountFollowsCumulativePrefix) {
  for (std::int64_t n : {0, 1, 2, 3, 4, 8, 9, 22, 23, 64, 65, 471, 472, 100000}) {
    const std::size_t k = leaves_for_rank(n);
    EXPECT_LE(first_rank_with_leaves(k), n);
    EXPECT_GT(first_rank_with_leaves(k + 1), n);
    EXPECT_EQ(unrank(n).leaf_count(), k);
  }
}

TEST(Codec, SampledRoundTrip) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto n = static_cast<std::int64_t>(rng() % 1'000'000'000'000ULL);
    ASSERT_EQ(rank(unrank(n)), n);
  }
}

TEST(Codec, RespectsLeafCap) {
  EXPECT_THROW(unrank(first_rank_with_leaves(6), 5), LimitError);
  EXPECT_NO_THROW(unrank(first_rank_with_leaves(6) - 1, 5));
}

TEST(Codec, LargestRanksStayInRange) {
  const std::int64_t max = std::numeric_limits<std::int64_t>::max();
  EXPECT_EQ(rank(unrank(max)), max);
}

TEST(PlaneTree, LeafInternalCountLaw) {
  for (std::size_t k = 1; k <= 6; ++k)
    for (const PlaneTree& t : enumerate_trees(k)) EXPECT_EQ(t.leaf_count(), t.internal_count() + 1);
}

TEST(PlaneTree, TextRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const PlaneTree t = unrank(static_cast<std::int64_t>(rng() % 5'000'000));
    EXPECT_TRUE(shape_equal(PlaneTree::parse(t.to_string()), t));
  }
  EXPECT_THROW(PlaneTree::parse("(*"), Error);
  EXPECT_THROW(PlaneTree::parse("(***)"), Error);
  EXPECT_THROW(PlaneTree::parse("* "), Error);
}

TEST(PlaneTree, PlaneOrderMatters) {
  EXPECT_TRUE(shape_equal(PlaneTree::leaf(), PlaneTree::leaf()));
  EXPECT_FALSE(shape_equal(PlaneTree::parse("(*(**))"), PlaneTree::parse("((**)*)")));
}

TEST(PlaneTree, PathsRoundTrip) {
  const PlaneTree t = PlaneTree::parse("((**)(*(**)))");
  for (PlaneTree::NodeId n = 0; n < t.node_count(); ++n) EXPECT_EQ(t.node_at(t.path_to(n)), n);
  EXPECT_EQ(t.node_at(TreePath::parse("LLL")), std::nullopt);
  EXPECT_EQ(t.subtree(*t.node_at(TreePath::parse("R"))), PlaneTree::parse("(*(**))"));
}

TEST(TreePath, Pathcodes) {
  EXPECT_EQ(TreePath().pathcode(), 1);
  EXPECT_EQ(TreePath::parse("L").pathcode(), 2);
  EXPECT_EQ(TreePath::parse("R").pathcode(), 3);
  EXPECT_EQ(TreePath::parse("LR").pathcode(), 5);
  for (std::int64_t code = 1; code < 5000; ++code) EXPECT_EQ(TreePath::from_pathcode(code).pathcode(), code);
  EXPECT_EQ(TreePath(std::vector<Step>(62, Step::Right)).pathcode(), std::numeric_limits<std::int64_t>::max());
  EXPECT_THROW(TreePath(std::vector<Step>(63, Step::Left)).pathcode(), OverflowError);
  EXPECT_THROW(TreePath::from_pathcode(0), Error);
}

TEST(FindSubstructure, Examples) {
  const PlaneTree h = PlaneTree::parse("((**)(*(**)))");
  EXPECT_EQ(find_substructure(h, h), TreePath());
  EXPECT_EQ(find_substructure(h, PlaneTree::leaf()), TreePath::parse("LL"));
  EXPECT_EQ(find_substructure(h, PlaneTree::parse("(**)")), TreePath::parse("L"));
  EXPECT_EQ(find_substructure(PlaneTree::parse("((**)(**))"), PlaneTree::parse("(*(**))")), std::nullopt);
}

// Brute force: the first node in preorder whose subtree equals the needle.
std::optional<PlaneTree::NodeId> brute_find(const PlaneTree& h, const PlaneTree& needle) {
  for (PlaneTree::NodeId n = 0; n < h.node_count(); ++n)
    if (h.subtree(n) == needle) return n;
  return std::nullopt;
}

TEST(FindSubstructure, AgreesWithBruteForceUpToSevenLeaves) {
  std::vector<PlaneTree> needles;
  for (std::size_t k = 1; k <= 4; ++k)
    for (const PlaneTree& t : enumerate_trees(k)) needles.push_back(t);
  for (std::size_t k = 1; k <= 7; ++k) {
    for (const PlaneTree& h : enumerate_trees(k)) {
      for (const PlaneTree& n : needles) {
        const auto path = find_substructure(h, n);
        const auto expect = brute_find(h, n);
        ASSERT_EQ(path.has_value(), expect.has_value()) << h.to_string() << " / " << n.to_string();
        if (path) {
          ASSERT_EQ(h.node_at(*path), expect);
          ASSERT_TRUE(shape_equal(h.subtree(*h.node_at(*path)), n));
        }
      }
    }
  }
}

TEST(RecognizeHeap, AcceptsBuilderLayout) {
  for (std::size_t k = 1; k <= 6; ++k) {
    for (const PlaneTree& t : enumerate_trees(k)) {
      const auto found = recognize_heap_ppct(snapshot_of(t), 0);
      ASSERT_TRUE(found) << t.to_string();
      EXPECT_EQ(found->shape, t);
      EXPECT_EQ(found->nodes.size(), t.node_count());
    }
  }
}

TEST(RecognizeHeap, IgnoresData) {
  HeapSnapshot s = snapshot_of(unrank(472));
  for (HeapCell& c : s.cells) c.data = 99;
  EXPECT_EQ(rank(recognize_heap_ppct(s, 0)->shape), 472);
}

TEST(RecognizeHeap, RejectsRedirectedSelfLoop) {
  HeapSnapshot s = snapshot_of(PlaneTree::parse("(**)"));
  s.cells[1].left = 2;
  EXPECT_FALSE(recognize_heap_ppct(s, 0));
}

TEST(RecognizeHeap, RejectsEverySingleEdgeMutation) {
  for (std::size_t k = 1; k <= 5; ++k) {
    for (const PlaneTree& t : enumerate_trees(k)) {
      const HeapSnapshot good = snapshot_of(t);
      const auto n = static_cast<HeapId>(good.cells.size());
      for (HeapId cell = 0; cell < n; ++cell) {
        for (int side = 0; side < 2; ++side) {
          std::vector<std::optional<HeapId>> targets{std::nullopt};
          for (HeapId to = 0; to < n; ++to) targets.emplace_back(to);
          for (const auto& to : targets) {
            HeapSnapshot bad = good;
            auto& field = side == 0 ? bad.cells[cell].left : bad.cells[cell].right;
            if (field == to) continue;
            field = to;
            ASSERT_FALSE(recognize_heap_ppct(bad, 0))
                << t.to_string() << " cell " << cell << (side == 0 ? ".left" : ".right");
          }
        }
      }
    }
  }
}

TEST(RecognizeHeap, RejectsCycles) {
  HeapSnapshot s;
  s.cells.resize(2);
  s.cells[0].left = 1;
  s.cells[0].right = 1;
  s.cells[1].left = 1;
  s.cells[1].right = 1;
  EXPECT_FALSE(recognize_heap_ppct(s, 0));
  s.cells[0].left = 0;
  s.cells[0].right = 0;
  EXPECT_TRUE(recognize_heap_ppct(s, 0));
}

}  // namespace
}  // namespace graphmark::ppct
