#include "graphmark/ppct.hpp"

#include <array>
#include <limits>

#include "graphmark/error.hpp"

namespace graphmark::ppct {
namespace {

// C(35) is the largest Catalan number that fits int64.
constexpr std::size_t kCatalanTableSize = 36;

constexpr std::array<std::int64_t, kCatalanTableSize> make_catalan_table() {
  std::array<std::int64_t, kCatalanTableSize> table{};
  __extension__ using Wide = unsigned __int128;
  Wide c = 1;
  for (std::size_t i = 0; i < kCatalanTableSize; ++i) {
    table[i] = static_cast<std::int64_t>(c);
    c = c * 2 * (2 * i + 1) / (i + 2);
  }
  return table;
}

constexpr auto kCatalan = make_catalan_table();

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw OverflowError("rank arithmetic overflows int64");
  return out;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError("rank arithmetic overflows int64");
  return out;
}

// Number of `leaves`-leaf trees whose left subtree has fewer than `left_leaves` leaves.
std::int64_t split_offset(std::size_t leaves, std::size_t left_leaves) {
  std::int64_t offset = 0;
  for (std::size_t i = 1; i < left_leaves; ++i)
    offset = checked_add(offset, checked_mul(catalan(i - 1), catalan(leaves - i - 1)));
  return offset;
}

// Appends the preorder leaf flags of the `local`-th tree with `leaves` leaves.
void unrank_local(std::size_t leaves, std::int64_t local, std::vector<bool>& flags) {
  if (leaves == 1) {
    flags.push_back(true);
    return;
  }
  flags.push_back(false);
  for (std::size_t i = 1; i < leaves; ++i) {
    const std::int64_t right_count = catalan(leaves - i - 1);
    const std::int64_t block = checked_mul(catalan(i - 1), right_count);
    if (local < block) {
      unrank_local(i, local / right_count, flags);
      unrank_local(leaves - i, local % right_count, flags);
      return;
    }
    local -= block;
  }
  throw Error("unrank: local rank out of range");
}

std::int64_t rank_local(const PlaneTree& tree, PlaneTree::NodeId node) {
  if (tree.is_leaf(node)) return 0;
  const PlaneTree::NodeId left = tree.left(node);
  const PlaneTree::NodeId right = tree.right(node);
  const std::size_t left_leaves = tree.leaves_under(left);
  const std::size_t leaves = left_leaves + tree.leaves_under(right);
  const std::int64_t right_count = catalan(leaves - left_leaves - 1);
  std::int64_t local = split_offset(leaves, left_leaves);
  local = checked_add(local, checked_mul(rank_local(tree, left), right_count));
  return checked_add(local, rank_local(tree, right));
}

}  // namespace

// ---------------------------------------------------------------------------
// TreePath

TreePath TreePath::parse(std::string_view text) {
  TreePath path;
  for (char c : text) {
    if (c == 'L')
      path.push_back(Step::Left);
    else if (c == 'R')
      path.push_back(Step::Right);
    else
      throw Error("tree path may only contain 'L' and 'R'");
  }
  return path;
}

TreePath TreePath::from_pathcode(std::int64_t code) {
  if (code < 1) throw Error("pathcode must be >= 1");
  int top = 63;
  while (((code >> top) & 1) == 0) --top;
  TreePath path;
  for (int bit = top - 1; bit >= 0; --bit)
    path.push_back(((code >> bit) & 1) ? Step::Right : Step::Left);
  return path;
}

std::string TreePath::to_string() const {
  std::string out;
  out.reserve(steps_.size());
  for (Step s : steps_) out.push_back(s == Step::Left ? 'L' : 'R');
  return out;
}

std::int64_t TreePath::pathcode() const {
  if (steps_.size() > kMaxPathcodeSteps)
    throw OverflowError("tree path of " + std::to_string(steps_.size()) +
                        " steps does not fit a pathcode");
  std::int64_t code = 1;
  for (Step s : steps_) code = (code << 1) | (s == Step::Right ? 1 : 0);
  return code;
}

// ---------------------------------------------------------------------------
// PlaneTree

PlaneTree::PlaneTree() : PlaneTree(std::vector<NodeId>{kLeaf}) {}

PlaneTree::PlaneTree(std::vector<NodeId> right) : right_(std::move(right)), size_(right_.size(), 1) {
  for (std::size_t i = right_.size(); i-- > 0;) {
    if (right_[i] != kLeaf) size_[i] = 1 + size_[i + 1] + size_[right_[i]];
  }
}

PlaneTree PlaneTree::join(const PlaneTree& left, const PlaneTree& right) {
  std::vector<NodeId> nodes;
  nodes.reserve(1 + left.node_count() + right.node_count());
  const auto left_base = static_cast<NodeId>(1);
  const auto right_base = static_cast<NodeId>(1 + left.node_count());
  nodes.push_back(right_base);
  for (NodeId r : left.right_) nodes.push_back(r == kLeaf ? kLeaf : r + left_base);
  for (NodeId r : right.right_) nodes.push_back(r == kLeaf ? kLeaf : r + right_base);
  return PlaneTree(std::move(nodes));
}

PlaneTree PlaneTree::from_preorder(const std::vector<bool>& is_leaf) {
  if (is_leaf.empty()) throw Error("empty preorder sequence");
  std::vector<NodeId> nodes(is_leaf.size(), kLeaf);
  // Internal nodes still waiting for their right child.
  std::vector<NodeId> open;
  bool complete = false;
  for (std::size_t i = 0; i < is_leaf.size(); ++i) {
    if (complete) throw Error("trailing nodes after a complete tree");
    const auto id = static_cast<NodeId>(i);
    if (!is_leaf[i]) {
      nodes[i] = 0;
      open.push_back(id);
      continue;
    }
    // A leaf closes the left subtree of the node on top of the stack, so the
    // next node in preorder is that node's right child.
    if (open.empty()) {
      complete = true;
      continue;
    }
    const NodeId parent = open.back();
    open.pop_back();
    if (i + 1 >= is_leaf.size()) throw Error("incomplete tree: missing right subtree");
    nodes[parent] = static_cast<NodeId>(i + 1);
  }
  if (!complete) throw Error("incomplete tree");
  return PlaneTree(std::move(nodes));
}

PlaneTree PlaneTree::parse(std::string_view text) {
  std::vector<bool> flags;
  std::size_t depth = 0;
  std::vector<int> children;  // children seen so far per open parenthesis
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(') {
      if (!children.empty()) ++children.back();
      children.push_back(0);
      flags.push_back(false);
      ++depth;
    } else if (c == '*') {
      if (children.empty() && !flags.empty()) throw Error("tree text: trailing leaf");
      if (!children.empty()) ++children.back();
      flags.push_back(true);
    } else if (c == ')') {
      if (children.empty() || children.back() != 2)
        throw Error("tree text: internal node needs exactly two children");
      children.pop_back();
      --depth;
    } else {
      throw Error(std::string("tree text: unexpected character '") + c + "'");
    }
    if (!children.empty() && children.back() > 2)
      throw Error("tree text: internal node needs exactly two children");
  }
  if (depth != 0) throw Error("tree text: unbalanced parentheses");
  return from_preorder(flags);
}

std::string PlaneTree::to_string() const {
  std::string out;
  out.reserve(node_count() + internal_count());
  // Close parentheses are emitted when a right subtree finishes.
  std::vector<NodeId> pending_close;  // end index (exclusive) of open internal nodes
  for (NodeId i = 0; i < node_count(); ++i) {
    if (is_leaf(i)) {
      out.push_back('*');
    } else {
      out.push_back('(');
      pending_close.push_back(static_cast<NodeId>(i + size_[i]));
    }
    while (!pending_close.empty() && pending_close.back() == i + 1) {
      out.push_back(')');
      pending_close.pop_back();
    }
  }
  return out;
}

PlaneTree PlaneTree::subtree(NodeId node) const {
  std::vector<NodeId> nodes(right_.begin() + node, right_.begin() + node + size_[node]);
  for (NodeId& r : nodes)
    if (r != kLeaf) r -= node;
  return PlaneTree(std::move(nodes));
}

std::optional<PlaneTree::NodeId> PlaneTree::node_at(const TreePath& path) const {
  NodeId node = root();
  for (Step s : path.steps()) {
    if (is_leaf(node)) return std::nullopt;
    node = s == Step::Left ? left(node) : right(node);
  }
  return node;
}

TreePath PlaneTree::path_to(NodeId node) const {
  TreePath path;
  NodeId at = root();
  while (at != node) {
    if (node < right_[at]) {
      path.push_back(Step::Left);
      at = left(at);
    } else {
      path.push_back(Step::Right);
      at = right(at);
    }
  }
  return path;
}

// ---------------------------------------------------------------------------
// Codec

std::int64_t catalan(std::size_t k) {
  if (k >= kCatalanTableSize)
    throw OverflowError("catalan(" + std::to_string(k) + ") overflows int64");
  return kCatalan[k];
}

std::int64_t first_rank_with_leaves(std::size_t leaves) {
  std::int64_t total = 0;
  for (std::size_t j = 1; j < leaves; ++j) total = checked_add(total, catalan(j - 1));
  return total;
}

std::size_t leaves_for_rank(std::int64_t n) {
  if (n < 0) throw Error("rank must be non-negative");
  std::size_t leaves = 1;
  std::int64_t next = 1;  // first rank of the (leaves + 1)-leaf trees
  while (true) {
    if (n < next) return leaves;
    std::int64_t bumped = 0;
    // Past int64 every remaining n belongs to the current size.
    if (leaves >= kCatalanTableSize || __builtin_add_overflow(next, kCatalan[leaves], &bumped))
      return leaves + 1;
    ++leaves;
    next = bumped;
  }
}

PlaneTree unrank(std::int64_t n, std::size_t max_leaves) {
  const std::size_t leaves = leaves_for_rank(n);
  if (leaves > max_leaves)
    throw LimitError("rank " + std::to_string(n) + " needs " + std::to_string(leaves) +
                     " leaves, above the cap of " + std::to_string(max_leaves));
  std::vector<bool> flags;
  flags.reserve(2 * leaves - 1);
  unrank_local(leaves, n - first_rank_with_leaves(leaves), flags);
  return PlaneTree::from_preorder(flags);
}

std::int64_t rank(const PlaneTree& tree) {
  return checked_add(first_rank_with_leaves(tree.leaf_count()), rank_local(tree, tree.root()));
}

bool shape_equal(const PlaneTree& a, const PlaneTree& b) { return a == b; }

std::optional<TreePath> find_substructure(const PlaneTree& haystack, const PlaneTree& needle) {
  const std::size_t width = needle.node_count();
  for (PlaneTree::NodeId v = 0; v < haystack.node_count(); ++v) {
    if (haystack.subtree_size(v) != width) continue;
    bool same = true;
    for (PlaneTree::NodeId j = 0; j < width && same; ++j)
      same = haystack.is_leaf(v + j) == needle.is_leaf(j);
    if (same) return haystack.path_to(v);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Heap recognition

std::optional<HeapPpct> recognize_heap_ppct(const HeapSnapshot& snapshot, HeapId root) {
  if (!snapshot.contains(root)) return std::nullopt;
  std::vector<bool> visited(snapshot.cells.size(), false);
  std::vector<bool> flags;
  std::vector<HeapId> order;
  std::vector<HeapId> leaves;
  std::vector<HeapId> stack{root};
  while (!stack.empty()) {
    const HeapId id = stack.back();
    stack.pop_back();
    if (!snapshot.contains(id) || visited[id]) return std::nullopt;
    visited[id] = true;
    order.push_back(id);
    const HeapCell& cell = snapshot.cells[id];
    if (cell.left == id) {
      if (!cell.right) return std::nullopt;
      flags.push_back(true);
      leaves.push_back(id);
      continue;
    }
    if (!cell.left || !cell.right) return std::nullopt;
    flags.push_back(false);
    stack.push_back(*cell.right);
    stack.push_back(*cell.left);
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const HeapId next = leaves[(i + 1) % leaves.size()];
    if (snapshot.cells[leaves[i]].right != next) return std::nullopt;
  }
  return HeapPpct{root, PlaneTree::from_preorder(flags), std::move(order)};
}

}  // namespace graphmark::ppct
