#pragma once

// Semantics-preserving transformations used to probe watermark resilience.
// Every pass is a pure function of (program, seed).

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "graphmark/ast.hpp"
#include "graphmark/interpreter.hpp"

namespace graphmark::attacks {

enum class AttackKind : std::uint8_t { Reorder, SplitFunction, DuplicateVariable, BogusField, ReassignVariables };

inline constexpr std::array<AttackKind, 5> kAllAttacks = {
    AttackKind::Reorder, AttackKind::SplitFunction, AttackKind::DuplicateVariable, AttackKind::BogusField,
    AttackKind::ReassignVariables};

std::string_view to_string(AttackKind kind);
std::optional<AttackKind> parse_attack(std::string_view name);
/// Function splitting stands in for class splitting and local duplication for
/// register duplication.
bool is_adapted(AttackKind kind);

/// Seeded topological shuffle inside each basic block. Heap, call, print,
/// snapshot and global accesses keep their relative order.
lang::Program reorder(const lang::Program& program, std::uint64_t seed);

/// Moves the first half of a seeded eligible function into a fresh helper.
/// Locals the second half needs travel back in the data fields of a chain of
/// nodes linked through `right`. Identity when no function has at least two
/// top-level statements and no return in the first half.
lang::Program split_function(const lang::Program& program, std::uint64_t seed);

/// Adds a shadow copy of one seeded local, refreshed after every definition,
/// and redirects a seeded non-empty subset of its uses to the copy.
lang::Program duplicate_variable(const lang::Program& program, std::uint64_t seed);

/// Inserts `x.data = k;` after a seeded subset of allocations. Identity when
/// the program reads a `data` field anywhere.
lang::Program bogus_field(const lang::Program& program, std::uint64_t seed);

/// Merges locals with disjoint live ranges into shared names (greedy
/// coloring in order of first appearance).
lang::Program reassign_variables(const lang::Program& program);

lang::Program apply(AttackKind kind, const lang::Program& program, std::uint64_t seed);

enum class Verdict : std::uint8_t { NotAffected, Affected };
std::string_view to_string(Verdict verdict);

struct AttackOutcome {
  AttackKind kind = AttackKind::Reorder;
  /// The attack changed the program text.
  bool transformed = false;
  /// Every input ran to completion with the same output as before the attack.
  bool runs_ok = false;
  bool watermark_survives = false;
  /// Output of the protected constants is unchanged; mirrors runs_ok.
  bool constants_intact = false;
  Verdict verdict = Verdict::Affected;

  friend bool operator==(const AttackOutcome&, const AttackOutcome&) = default;
};

using Inputs = std::vector<std::vector<std::int64_t>>;
using Transform = std::function<lang::Program(const lang::Program&)>;

/// Compares `attacked` against `original` on `inputs` and tries extraction.
AttackOutcome evaluate_attack(const lang::Program& original, const lang::Program& attacked, AttackKind kind,
                              std::int64_t watermark, std::span<const std::int64_t> trigger, const Inputs& inputs,
                              const lang::RunLimits& limits = {});

/// Applies the attack to both builds. Returns {watermarked, protected}.
std::pair<AttackOutcome, AttackOutcome> assess(const lang::Program& wm, const lang::Program& tp,
                                               std::int64_t watermark, std::span<const std::int64_t> trigger,
                                               const Inputs& inputs, AttackKind kind, std::uint64_t seed,
                                               const lang::RunLimits& limits = {});

/// Same, with an arbitrary transformation labelled as `kind`.
std::pair<AttackOutcome, AttackOutcome> assess(const lang::Program& wm, const lang::Program& tp,
                                               std::int64_t watermark, std::span<const std::int64_t> trigger,
                                               const Inputs& inputs, const Transform& transform, AttackKind kind,
                                               const lang::RunLimits& limits = {});

}  // namespace graphmark::attacks
