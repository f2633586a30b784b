#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "graphmark/ast.hpp"
#include "graphmark/heap_snapshot.hpp"

namespace graphmark::lang {

struct RunLimits {
  std::uint64_t max_steps = 10'000'000;
  std::uint64_t max_allocations = 1'000'000;
  std::uint32_t max_call_depth = 1'000;
};

enum class RunStatus : std::uint8_t {
  Ok,
  StepLimit,
  HeapLimit,
  DivisionByZero,
  NullDereference,
  Overflow,
  TypeError,
  CallDepthLimit,
  BadArguments,
};

std::string_view to_string(RunStatus status);

struct RunResult {
  std::vector<std::string> output;
  /// One per executed statement; a `while` counts once per condition test.
  std::uint64_t steps = 0;
  /// Largest number of nodes reachable from locals of live frames and globals,
  /// sampled after every allocation.
  std::uint64_t peak_live_nodes = 0;
  std::uint64_t total_allocations = 0;
  RunStatus status = RunStatus::Ok;
  std::string error_detail;
  /// Heap image at the first executed `snapshot();`.
  std::optional<HeapSnapshot> snapshot;

  bool ok() const { return status == RunStatus::Ok; }

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Runs `main` with `args` bound to its parameters. Never throws for runtime
/// faults; they end the run with a non-Ok status. The program must have
/// passed validate().
RunResult interpret(const Program& program, std::span<const std::int64_t> args,
                    const RunLimits& limits = {});

}  // namespace graphmark::lang
