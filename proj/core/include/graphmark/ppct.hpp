#pragma once

// Planted plane cubic trees: shapes, the integer <-> shape bijection, subtree
// search, and recognition of heap-resident PPCTs.
//
// Global ranking order: trees are ordered by leaf count, then (within one
// size) by the leaf count of the left subtree, then by the left subtree's
// rank, then by the right subtree's rank. The single leaf has rank 0 and the
// fourteen 5-leaf shapes occupy ranks 9..22.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphmark/heap_snapshot.hpp"

namespace graphmark::ppct {

inline constexpr std::size_t kDefaultMaxLeaves = 64;

/// Longest path whose pathcode still fits a signed 64-bit integer.
inline constexpr std::size_t kMaxPathcodeSteps = 62;

enum class Step : std::uint8_t { Left, Right };

/// Root-relative route to a node, one L/R step per edge.
class TreePath {
 public:
  TreePath() = default;
  explicit TreePath(std::vector<Step> steps) : steps_(std::move(steps)) {}

  /// Parses a string of 'L'/'R' characters.
  static TreePath parse(std::string_view text);

  /// Inverse of pathcode(). Rejects codes < 1.
  static TreePath from_pathcode(std::int64_t code);

  const std::vector<Step>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  void push_back(Step step) { steps_.push_back(step); }

  std::string to_string() const;

  /// A leading 1 bit followed by one bit per step (L=0, R=1), most significant
  /// first. The empty path encodes as 1. Throws OverflowError past 62 steps.
  std::int64_t pathcode() const;

  friend bool operator==(const TreePath&, const TreePath&) = default;

 private:
  std::vector<Step> steps_;
};

/// Rooted ordered binary tree in which every internal node has two children.
///
/// Stored in preorder: node 0 is the root and an internal node's left child
/// immediately follows it. Two trees compare equal iff they have the same
/// shape.
class PlaneTree {
 public:
  using NodeId = std::uint32_t;

  /// The single-leaf tree.
  PlaneTree();

  static PlaneTree leaf() { return PlaneTree(); }
  static PlaneTree join(const PlaneTree& left, const PlaneTree& right);

  /// Canonical text form: leaf = "*", internal = "(" left right ")".
  static PlaneTree parse(std::string_view text);
  std::string to_string() const;

  /// Builds a tree from its preorder leaf/internal sequence. Throws Error if
  /// the sequence is not a complete cubic tree.
  static PlaneTree from_preorder(const std::vector<bool>& is_leaf);

  std::size_t node_count() const { return right_.size(); }
  std::size_t leaf_count() const { return (node_count() + 1) / 2; }
  std::size_t internal_count() const { return node_count() / 2; }

  NodeId root() const { return 0; }
  bool is_leaf(NodeId node) const { return right_[node] == kLeaf; }
  NodeId left(NodeId node) const { return node + 1; }
  NodeId right(NodeId node) const { return right_[node]; }

  /// Number of preorder slots occupied by the subtree rooted at `node`.
  std::size_t subtree_size(NodeId node) const { return size_[node]; }
  std::size_t leaves_under(NodeId node) const { return (subtree_size(node) + 1) / 2; }

  PlaneTree subtree(NodeId node) const;

  /// Node reached by following `path`, or nullopt if it steps off a leaf.
  std::optional<NodeId> node_at(const TreePath& path) const;
  TreePath path_to(NodeId node) const;

  friend bool operator==(const PlaneTree&, const PlaneTree&) = default;

 private:
  static constexpr NodeId kLeaf = 0xffffffffu;

  explicit PlaneTree(std::vector<NodeId> right);

  std::vector<NodeId> right_;
  std::vector<std::uint32_t> size_;
};

/// k-th Catalan number. Throws OverflowError when it exceeds int64.
std::int64_t catalan(std::size_t k);

/// Number of trees with fewer than `leaves` leaves, i.e. the global rank of
/// the first tree with exactly `leaves` leaves.
std::int64_t first_rank_with_leaves(std::size_t leaves);

/// Leaf count of unrank(n).
std::size_t leaves_for_rank(std::int64_t n);

/// Throws LimitError if the tree would exceed `max_leaves`.
PlaneTree unrank(std::int64_t n, std::size_t max_leaves = kDefaultMaxLeaves);

/// Throws OverflowError when the rank does not fit int64.
std::int64_t rank(const PlaneTree& tree);

bool shape_equal(const PlaneTree& a, const PlaneTree& b);

/// Path to the first node, in preorder, whose full subtree has the shape of
/// `needle`.
std::optional<TreePath> find_substructure(const PlaneTree& haystack, const PlaneTree& needle);

/// A PPCT found in a heap snapshot.
struct HeapPpct {
  HeapId root = 0;
  PlaneTree shape;
  /// Heap ids of the tree nodes, in the same preorder as `shape`.
  std::vector<HeapId> nodes;
};

/// Validates the heap layout rooted at `root`: internal nodes have two
/// non-null children, every leaf's left field points to itself, and leaf
/// right fields form one cycle over all leaves in left-to-right order. The
/// `data` field is ignored.
std::optional<HeapPpct> recognize_heap_ppct(const HeapSnapshot& snapshot, HeapId root);

}  // namespace graphmark::ppct
