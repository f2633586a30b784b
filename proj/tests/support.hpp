#pragma once

// Helpers shared by the test binaries: corpus access and independent oracles.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphmark/ast.hpp"
#include "graphmark/bench.hpp"
#include "graphmark/heap_snapshot.hpp"
#include "graphmark/interpreter.hpp"
#include "graphmark/ppct.hpp"

namespace graphmark::testing {

inline std::filesystem::path source_dir() { return GRAPHMARK_SOURCE_DIR; }
inline std::filesystem::path corpus_dir() { return source_dir() / "corpus"; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline std::vector<bench::CorpusProgram> demo_corpus() {
  return bench::load_corpus(corpus_dir(), corpus_dir() / "inputs.json");
}

inline constexpr std::int64_t kDemoWatermark = 472;
inline const std::vector<std::int64_t> kDemoTrigger = {9, 9};

/// All trees with exactly `leaves` leaves, in the committed within-size
/// order, built by direct recursion rather than by the codec.
inline std::vector<ppct::PlaneTree> enumerate_trees(std::size_t leaves) {
  if (leaves == 1) return {ppct::PlaneTree::leaf()};
  std::vector<ppct::PlaneTree> out;
  for (std::size_t i = 1; i < leaves; ++i)
    for (const auto& l : enumerate_trees(i))
      for (const auto& r : enumerate_trees(leaves - i)) out.push_back(ppct::PlaneTree::join(l, r));
  return out;
}

/// Heap image of `tree` laid out as the builder lays it out: preorder ids,
/// leaf self-loops, leaf cycle.
inline HeapSnapshot snapshot_of(const ppct::PlaneTree& tree) {
  HeapSnapshot s;
  s.cells.resize(tree.node_count());
  std::vector<HeapId> leaves;
  for (HeapId i = 0; i < tree.node_count(); ++i) {
    if (tree.is_leaf(i)) {
      s.cells[i].left = i;
      leaves.push_back(i);
    } else {
      s.cells[i].left = tree.left(i);
      s.cells[i].right = tree.right(i);
    }
  }
  for (std::size_t j = 0; j < leaves.size(); ++j) s.cells[leaves[j]].right = leaves[(j + 1) % leaves.size()];
  s.anchors.emplace_back("root", 0);
  return s;
}

/// Printed output of every input, with a separator between runs; a failed run
/// contributes its status.
inline std::vector<std::string> outputs(const lang::Program& p, const bench::Inputs& inputs,
                                        const lang::RunLimits& limits = {}) {
  std::vector<std::string> out;
  for (const auto& args : inputs) {
    const lang::RunResult r = lang::interpret(p, args, limits);
    out.insert(out.end(), r.output.begin(), r.output.end());
    out.push_back(r.ok() ? "--" : "!" + std::string(lang::to_string(r.status)));
  }
  return out;
}

/// splitmix64 finalizer, used for reproducible pseudo-random predicates.
inline std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace graphmark::testing
