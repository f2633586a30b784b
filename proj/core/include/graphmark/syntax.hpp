#pragma once

// Text <-> AST for `.gm` sources.
//
//   program := ( "global" IDENT ";" | function )*
//   function := "fn" IDENT "(" [ IDENT ( "," IDENT )* ] ")" "{" stmt* "}"
//   stmt := IDENT "=" "node" "(" ")" ";"
//         | IDENT "=" expr ";"
//         | IDENT "." field "=" expr ";"
//         | "if" "(" expr ")" "{" stmt* "}" [ "else" "{" stmt* "}" ]
//         | "while" "(" expr ")" "{" stmt* "}"
//         | "print" "(" expr ")" ";"
//         | "return" expr ";"
//         | "snapshot" "(" ")" ";"
//         | IDENT "(" args ")" ";"
//   expr precedence, loosest first: or, and, == !=, < <= > >=, + -, * / %, unary -
//   primary := INT | "null" | IDENT | IDENT "." field | IDENT "(" args ")"
//            | "is_null" "(" IDENT ")" | "(" expr ")"
//
// Comments run from '#' to end of line.

#include <cstddef>
#include <string>
#include <string_view>

#include "graphmark/ast.hpp"

namespace graphmark::lang {

/// Parses and validates. Throws SyntaxError or ValidationError.
Program parse(std::string_view text);

/// Parses without the static checks.
Program parse_unchecked(std::string_view text);

/// Canonical text: two-space indentation, one statement per line, a blank
/// line between top-level items, minimal parentheses.
std::string serialize(const Program& program);
std::string serialize(const Function& function);
std::string serialize(const Expr& expr);

/// Byte length of the canonical serialization.
std::size_t code_size(const Program& program);

/// Static checks: unique names, known callees with matching arity, no
/// parameter shadowing a global, `main` present, definite assignment of
/// every local before use. Throws ValidationError.
void validate(const Program& program);

}  // namespace graphmark::lang
