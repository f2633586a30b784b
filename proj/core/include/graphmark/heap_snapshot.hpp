#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace graphmark {

using HeapId = std::uint32_t;

struct HeapCell {
  std::optional<HeapId> left;
  std::optional<HeapId> right;
  // Only integer payloads are captured; a reference stored in `data` shows up as 0.
  std::int64_t data = 0;

  friend bool operator==(const HeapCell&, const HeapCell&) = default;
};

/// Heap image taken when a program executes `snapshot();`.
/// Cells are indexed by id, which is also the allocation order.
struct HeapSnapshot {
  std::vector<HeapCell> cells;
  /// Globals holding a node reference at capture time, in declaration order.
  std::vector<std::pair<std::string, HeapId>> anchors;

  bool contains(HeapId id) const { return id < cells.size(); }

  friend bool operator==(const HeapSnapshot&, const HeapSnapshot&) = default;
};

}  // namespace graphmark
