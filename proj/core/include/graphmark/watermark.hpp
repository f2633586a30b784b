#pragma once

// Numeric dynamic-graph watermark: code that builds unrank(W) on the heap at
// the start of every run, a trigger input that captures a heap snapshot, and
// extraction by recognizing and ranking the anchored tree.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphmark/ast.hpp"
#include "graphmark/interpreter.hpp"
#include "graphmark/ppct.hpp"

namespace graphmark::watermark {

inline constexpr std::string_view kBuilderName = "__wm_build";
inline constexpr std::string_view kAnchorAccessor = "__wm_anchor";
inline constexpr std::string_view kDefaultAnchor = "__wm_root";

struct WatermarkSpec {
  std::int64_t value = 0;
  /// Secret input to `main` that captures the snapshot; must match main's arity.
  std::vector<std::int64_t> trigger;
  /// Global holding the tree root.
  std::string anchor = std::string(kDefaultAnchor);
  std::size_t max_leaves = ppct::kDefaultMaxLeaves;
};

/// Straight-line `__wm_build()`: all allocations, then internal child stores,
/// then leaf self-loops and the leaf cycle, then the anchor store. Node
/// variables n0, n1, ... follow the tree's preorder.
lang::Function synthesize_builder(const WatermarkSpec& spec);

/// `__wm_anchor()` returning the anchor global.
lang::Function anchor_accessor(const WatermarkSpec& spec);

/// Adds the anchor global, builder and accessor, and prepends to main a call
/// to the builder plus `if (<params> == <trigger>) { snapshot(); }`.
/// Throws ReservedNameError if the program already uses a reserved name.
lang::Program embed(const lang::Program& program, const WatermarkSpec& spec);

struct Extraction {
  std::optional<std::int64_t> value;
  lang::RunStatus status = lang::RunStatus::Ok;
  std::string detail;

  bool found() const { return value.has_value(); }
};

/// Runs the program on the trigger input and ranks the first anchored PPCT in
/// the snapshot.
Extraction extract(const lang::Program& program, std::span<const std::int64_t> trigger,
                   const lang::RunLimits& limits = {});

/// Shape of the watermark embedded in `program`, recovered by extraction.
std::optional<ppct::PlaneTree> embedded_tree(const lang::Program& program, std::span<const std::int64_t> trigger,
                                             const lang::RunLimits& limits = {},
                                             std::size_t max_leaves = ppct::kDefaultMaxLeaves);

}  // namespace graphmark::watermark
