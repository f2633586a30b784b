#include "graphmark/ast.hpp"

#include <algorithm>

namespace graphmark::lang {

std::string_view to_string(Field field) {
  switch (field) {
    case Field::Left: return "left";
    case Field::Right: return "right";
    case Field::Data: return "data";
  }
  return "?";
}

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

Expr Expr::binary(BinaryOp o, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::Binary;
  e.op = o;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expr Expr::neg(Expr operand) {
  Expr e;
  e.kind = Kind::Neg;
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::call(std::string callee, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::Call;
  e.name = std::move(callee);
  e.operands = std::move(args);
  return e;
}

Stmt Stmt::assign(std::string target, Expr value) {
  Stmt s;
  s.kind = Kind::Assign;
  s.name = std::move(target);
  s.expr = std::move(value);
  return s;
}

Stmt Stmt::alloc(std::string target) {
  Stmt s;
  s.kind = Kind::Alloc;
  s.name = std::move(target);
  return s;
}

Stmt Stmt::field_store(std::string target, Field f, Expr value) {
  Stmt s;
  s.kind = Kind::FieldStore;
  s.name = std::move(target);
  s.field = f;
  s.expr = std::move(value);
  return s;
}

Stmt Stmt::if_else(Expr cond, std::vector<Stmt> then_body, std::vector<Stmt> else_body) {
  Stmt s;
  s.kind = Kind::If;
  s.expr = std::move(cond);
  s.body = std::move(then_body);
  s.else_body = std::move(else_body);
  return s;
}

Stmt Stmt::while_loop(Expr cond, std::vector<Stmt> body) {
  Stmt s;
  s.kind = Kind::While;
  s.expr = std::move(cond);
  s.body = std::move(body);
  return s;
}

Stmt Stmt::call(std::string callee, std::vector<Expr> args) {
  Stmt s;
  s.kind = Kind::CallStmt;
  s.name = std::move(callee);
  s.args = std::move(args);
  return s;
}

Stmt Stmt::ret(Expr value) {
  Stmt s;
  s.kind = Kind::Return;
  s.expr = std::move(value);
  return s;
}

Stmt Stmt::print(Expr value) {
  Stmt s;
  s.kind = Kind::Print;
  s.expr = std::move(value);
  return s;
}

Stmt Stmt::snapshot() {
  Stmt s;
  s.kind = Kind::Snapshot;
  return s;
}

const Function* Program::find(std::string_view name) const {
  auto it = std::find_if(functions.begin(), functions.end(),
                         [&](const Function& f) { return f.name == name; });
  return it == functions.end() ? nullptr : &*it;
}

Function* Program::find(std::string_view name) {
  auto it = std::find_if(functions.begin(), functions.end(),
                         [&](const Function& f) { return f.name == name; });
  return it == functions.end() ? nullptr : &*it;
}

bool Program::has_global(std::string_view name) const {
  return std::find(globals.begin(), globals.end(), name) != globals.end();
}

bool is_generated_name(std::string_view name) {
  return name.starts_with(kWatermarkPrefix) || name.starts_with(kTamperPrefix);
}

}  // namespace graphmark::lang
