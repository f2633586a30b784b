#pragma once

// AST of the `.gm` mini-language: integer and node-reference values, heap
// nodes with left/right/data fields, globals, functions, and structured
// control flow. All types are plain values; copying a Program deep-copies it.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace graphmark::lang {

enum class Field : std::uint8_t { Left, Right, Data };

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

std::string_view to_string(Field field);
std::string_view to_string(BinaryOp op);

struct Expr {
  enum class Kind : std::uint8_t { IntLit, NullLit, Var, FieldLoad, Binary, Neg, Call, IsNull };

  Kind kind = Kind::IntLit;
  std::int64_t value = 0;       // IntLit
  std::string name;             // Var, FieldLoad, Call, IsNull
  Field field = Field::Data;    // FieldLoad
  BinaryOp op = BinaryOp::Add;  // Binary
  std::vector<Expr> operands;   // Binary: 2, Neg: 1, Call: arguments

  static Expr integer(std::int64_t v) { return Expr{Kind::IntLit, v, {}, Field::Data, BinaryOp::Add, {}}; }
  static Expr null() { return Expr{Kind::NullLit, 0, {}, Field::Data, BinaryOp::Add, {}}; }
  static Expr var(std::string n) { return Expr{Kind::Var, 0, std::move(n), Field::Data, BinaryOp::Add, {}}; }
  static Expr load(std::string n, Field f) { return Expr{Kind::FieldLoad, 0, std::move(n), f, BinaryOp::Add, {}}; }
  static Expr binary(BinaryOp o, Expr lhs, Expr rhs);
  static Expr neg(Expr operand);
  static Expr call(std::string callee, std::vector<Expr> args);
  static Expr is_null(std::string n) { return Expr{Kind::IsNull, 0, std::move(n), Field::Data, BinaryOp::Add, {}}; }

  friend bool operator==(const Expr&, const Expr&) = default;
};

struct Stmt {
  enum class Kind : std::uint8_t { Assign, Alloc, FieldStore, If, While, CallStmt, Return, Print, Snapshot };

  Kind kind = Kind::Print;
  std::string name;             // Assign/Alloc/FieldStore target, CallStmt callee
  Field field = Field::Data;    // FieldStore
  Expr expr;                    // Assign/FieldStore value, If/While condition, Return/Print value
  std::vector<Expr> args;       // CallStmt
  std::vector<Stmt> body;       // If then-branch, While body
  std::vector<Stmt> else_body;  // If else-branch

  static Stmt assign(std::string target, Expr value);
  static Stmt alloc(std::string target);
  static Stmt field_store(std::string target, Field f, Expr value);
  static Stmt if_else(Expr cond, std::vector<Stmt> then_body, std::vector<Stmt> else_body = {});
  static Stmt while_loop(Expr cond, std::vector<Stmt> body);
  static Stmt call(std::string callee, std::vector<Expr> args);
  static Stmt ret(Expr value);
  static Stmt print(Expr value);
  static Stmt snapshot();

  bool is_control_flow() const { return kind == Kind::If || kind == Kind::While || kind == Kind::Return; }

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct Function {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;

  friend bool operator==(const Function&, const Function&) = default;
};

struct Program {
  std::vector<std::string> globals;
  std::vector<Function> functions;

  const Function* find(std::string_view name) const;
  Function* find(std::string_view name);
  bool has_global(std::string_view name) const;

  friend bool operator==(const Program&, const Program&) = default;
};

/// Reserved name prefixes for generated watermark and tamper-proofing code.
inline constexpr std::string_view kWatermarkPrefix = "__wm_";
inline constexpr std::string_view kTamperPrefix = "__tp_";

bool is_generated_name(std::string_view name);

}  // namespace graphmark::lang
