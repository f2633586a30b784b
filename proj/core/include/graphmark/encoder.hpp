#pragma once

// Constant encoding: integer literals are replaced by calls that navigate the
// watermark tree, rank a subtree, and rebuild the constant arithmetically.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "graphmark/ast.hpp"
#include "graphmark/interpreter.hpp"
#include "graphmark/ppct.hpp"

namespace graphmark::encoder {

inline constexpr std::size_t kDefaultSplitDepth = 8;
inline constexpr std::string_view kDecodeName = "__tp_decode";
inline constexpr std::string_view kAddName = "__tp_add";
inline constexpr std::string_view kMulName = "__tp_mul";

/// Address of one integer literal. `path` walks statements from the function
/// body: an index, then for each nesting level a branch selector (0 = then or
/// loop body, 1 = else) followed by an index. `ordinal` counts literals, in
/// preorder, among the statement's own expressions (not nested bodies).
struct SiteLocation {
  std::string function;
  std::vector<std::size_t> path;
  std::size_t ordinal = 0;

  /// e.g. "main:3.0.1#0"
  std::string to_string() const;

  friend bool operator==(const SiteLocation&, const SiteLocation&) = default;
};

struct ConstantSite {
  SiteLocation location;
  /// Literal value as written; may be negative.
  std::int64_t value = 0;

  friend bool operator==(const ConstantSite&, const ConstantSite&) = default;
};

struct SelectionPolicy {
  enum class Kind : std::uint8_t { All, List };
  Kind kind = Kind::All;
  /// Kind::List: literals whose magnitude equals one of these are selected.
  std::vector<std::int64_t> values;
  /// Kind::All: also select literals 0, 1 and -1.
  bool include_trivial = false;

  /// "all" or "list:13,6".
  static SelectionPolicy parse(std::string_view text);
};

/// Literal sites outside generated `__wm_*`/`__tp_*` functions, in document
/// order. INT64_MIN is never selected since its magnitude is unrepresentable.
std::vector<ConstantSite> select_constants(const lang::Program& program, const SelectionPolicy& policy);

/// Expression over tree lookups and residual literals.
struct EncodedExpr {
  enum class Kind : std::uint8_t { Literal, Lookup, Add, Mul };
  Kind kind = Kind::Literal;
  /// Literal: the value. Lookup: the expected decoded rank.
  std::int64_t value = 0;
  /// Lookup: route from the watermark root. Empty until planned.
  ppct::TreePath path;
  std::vector<EncodedExpr> operands;

  static EncodedExpr literal(std::int64_t v);
  static EncodedExpr lookup(std::int64_t expected, ppct::TreePath path = {});
  static EncodedExpr add(EncodedExpr a, EncodedExpr b);
  static EncodedExpr mul(EncodedExpr a, EncodedExpr b);

  /// Evaluates with every lookup yielding its expected value.
  std::int64_t evaluate() const;
  /// Evaluates with lookups resolved by `decode`.
  std::int64_t evaluate(const std::function<std::int64_t(const EncodedExpr&)>& decode) const;
  std::size_t lookup_count() const;

  friend bool operator==(const EncodedExpr&, const EncodedExpr&) = default;
};

/// One iteration of the halving loop. `original == even * current + odd`
/// holds at every observation.
struct SplitStep {
  std::int64_t current = 0;
  std::int64_t even = 1;
  std::int64_t odd = 0;
};

using EncodablePredicate = std::function<bool(std::int64_t)>;
/// Called with the value being split and the state after initialization and
/// after each loop step, at every recursion level.
using SplitObserver = std::function<void(std::int64_t original, const SplitStep& step)>;

struct SplitResult {
  EncodedExpr expr;
  /// Some component was left as a literal because the depth cap was hit.
  bool depth_capped = false;
};

/// Halves while even, decrements while odd, stopping once `current` is at
/// most 1 or encodable; the result is `even * current + odd`. Components that
/// are not encodable and smaller than their parent are split recursively, up
/// to `max_depth` levels. A split without any lookup collapses to a literal.
/// Requires c >= 0.
SplitResult split_constant(std::int64_t c, const EncodablePredicate& encodable,
                           std::size_t max_depth = kDefaultSplitDepth, const SplitObserver& observer = {});

/// Memoized "is unrank(x) a full subtree of the watermark tree".
class SubtreeIndex {
 public:
  explicit SubtreeIndex(ppct::PlaneTree watermark, std::size_t max_leaves = ppct::kDefaultMaxLeaves);

  const std::optional<ppct::TreePath>& find(std::int64_t value);
  bool encodable(std::int64_t value) { return find(value).has_value(); }
  const ppct::PlaneTree& tree() const { return tree_; }

 private:
  ppct::PlaneTree tree_;
  std::size_t max_leaves_;
  std::unordered_map<std::int64_t, std::optional<ppct::TreePath>> memo_;
};

struct SiteEncoding {
  ConstantSite site;
  /// Encodes |site.value|.
  EncodedExpr expr;
  bool negated = false;
  /// No lookup could be used; the literal is left as is.
  bool unprotected = false;
  bool depth_capped = false;

  friend bool operator==(const SiteEncoding&, const SiteEncoding&) = default;
};

struct EncodingPlan {
  std::vector<SiteEncoding> entries;

  std::size_t protected_sites() const;
  std::size_t lookup_count() const;

  friend bool operator==(const EncodingPlan&, const EncodingPlan&) = default;
};

struct PlanOptions {
  std::size_t max_leaves = ppct::kDefaultMaxLeaves;
  std::size_t split_depth = kDefaultSplitDepth;
};

EncodingPlan plan_encoding(const lang::Program& program, const ppct::PlaneTree& watermark,
                           const std::vector<ConstantSite>& sites, const PlanOptions& options = {});

/// The fixed decoder functions. Identical for every program.
std::vector<lang::Function> gen_runtime_support();

/// Bytes the support functions add when appended to a program.
std::size_t support_size();

/// Replacement expression for a planned site.
lang::Expr render(const SiteEncoding& entry);

/// Serialized size of the replacement minus that of the original literal.
std::int64_t site_delta(const SiteEncoding& entry);

/// Replaces each protected site and appends the support functions once (only
/// when at least one site is replaced). Throws SiteDriftError if a planned
/// site no longer holds its literal.
lang::Program rewrite(const lang::Program& program, const EncodingPlan& plan);

/// Machine-readable plan description.
std::string plan_to_json(const EncodingPlan& plan);

struct Protection {
  lang::Program program;
  EncodingPlan plan;
  ppct::PlaneTree watermark;
};

/// Extracts the watermark tree from `watermarked` on `trigger`, then selects,
/// plans and rewrites. Throws Error if no watermark is found.
Protection protect(const lang::Program& watermarked, std::span<const std::int64_t> trigger,
                   const SelectionPolicy& policy, const PlanOptions& options = {},
                   const lang::RunLimits& limits = {});

}  // namespace graphmark::encoder
