#pragma once

// Structural queries over functions used by the transformation passes.

#include <set>
#include <string>
#include <vector>

#include "graphmark/ast.hpp"

namespace graphmark::lang {

/// Maximal run of consecutive statements with no if/while/return among them.
using BasicBlock = std::vector<const Stmt*>;

/// Blocks of the function in document order; blocks nested in a compound
/// statement follow the block that precedes the statement.
std::vector<BasicBlock> basic_blocks(const Function& function);

using NameSet = std::set<std::string, std::less<>>;

struct StmtEffects {
  NameSet defs;  // locals written
  NameSet uses;  // locals read
  /// Touches the heap, calls a function, prints, snapshots, or reads/writes a global.
  bool effect = false;
};

/// Effects of a statement including any nested bodies.
StmtEffects effects_of(const Stmt& stmt, const Program& program);

/// Locals read by an expression (globals excluded).
void collect_uses(const Expr& expr, const Program& program, NameSet& out);

/// Parameters first, then other locals in order of first appearance.
std::vector<std::string> locals_of(const Function& function, const Program& program);

/// Every identifier occurring in the program: globals, functions, params, locals.
NameSet all_names(const Program& program);

/// `base` if unused, else base2, base3, ...
std::string fresh_name(const std::string& base, const NameSet& taken);

}  // namespace graphmark::lang
