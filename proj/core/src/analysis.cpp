#include "graphmark/analysis.hpp"

#include <algorithm>

namespace graphmark::lang {
namespace {

void blocks_of(const std::vector<Stmt>& body, std::vector<BasicBlock>& out) {
  BasicBlock run;
  for (const Stmt& s : body) {
    if (!s.is_control_flow()) {
      run.push_back(&s);
      continue;
    }
    if (!run.empty()) out.push_back(std::move(run));
    run.clear();
    blocks_of(s.body, out);
    blocks_of(s.else_body, out);
  }
  if (!run.empty()) out.push_back(std::move(run));
}

bool expr_has_effect(const Expr& e, const Program& program) {
  switch (e.kind) {
    case Expr::Kind::FieldLoad:
    case Expr::Kind::Call: return true;
    case Expr::Kind::Var:
    case Expr::Kind::IsNull: return program.has_global(e.name);
    default: break;
  }
  return std::any_of(e.operands.begin(), e.operands.end(),
                     [&](const Expr& op) { return expr_has_effect(op, program); });
}

void note_local(const std::string& name, const Program& program, std::vector<std::string>& order,
                NameSet& seen) {
  if (program.has_global(name) || seen.contains(name)) return;
  seen.insert(name);
  order.push_back(name);
}

void locals_in_expr(const Expr& e, const Program& program, std::vector<std::string>& order, NameSet& seen) {
  switch (e.kind) {
    case Expr::Kind::Var:
    case Expr::Kind::FieldLoad:
    case Expr::Kind::IsNull: note_local(e.name, program, order, seen); break;
    default: break;
  }
  for (const Expr& op : e.operands) locals_in_expr(op, program, order, seen);
}

void locals_in_body(const std::vector<Stmt>& body, const Program& program, std::vector<std::string>& order,
                    NameSet& seen) {
  for (const Stmt& s : body) {
    // Right-hand sides are read before the target is written.
    locals_in_expr(s.expr, program, order, seen);
    for (const Expr& a : s.args) locals_in_expr(a, program, order, seen);
    switch (s.kind) {
      case Stmt::Kind::Assign:
      case Stmt::Kind::Alloc:
      case Stmt::Kind::FieldStore: note_local(s.name, program, order, seen); break;
      default: break;
    }
    locals_in_body(s.body, program, order, seen);
    locals_in_body(s.else_body, program, order, seen);
  }
}

void names_in_expr(const Expr& e, NameSet& out) {
  if (!e.name.empty()) out.insert(e.name);
  for (const Expr& op : e.operands) names_in_expr(op, out);
}

void names_in_body(const std::vector<Stmt>& body, NameSet& out) {
  for (const Stmt& s : body) {
    if (!s.name.empty()) out.insert(s.name);
    names_in_expr(s.expr, out);
    for (const Expr& a : s.args) names_in_expr(a, out);
    names_in_body(s.body, out);
    names_in_body(s.else_body, out);
  }
}

}  // namespace

std::vector<BasicBlock> basic_blocks(const Function& function) {
  std::vector<BasicBlock> out;
  blocks_of(function.body, out);
  return out;
}

void collect_uses(const Expr& expr, const Program& program, NameSet& out) {
  switch (expr.kind) {
    case Expr::Kind::Var:
    case Expr::Kind::FieldLoad:
    case Expr::Kind::IsNull:
      if (!program.has_global(expr.name)) out.insert(expr.name);
      break;
    default: break;
  }
  for (const Expr& op : expr.operands) collect_uses(op, program, out);
}

StmtEffects effects_of(const Stmt& stmt, const Program& program) {
  StmtEffects fx;
  collect_uses(stmt.expr, program, fx.uses);
  fx.effect = expr_has_effect(stmt.expr, program);
  for (const Expr& a : stmt.args) {
    collect_uses(a, program, fx.uses);
    fx.effect = fx.effect || expr_has_effect(a, program);
  }
  const bool global_target = !stmt.name.empty() && program.has_global(stmt.name);
  switch (stmt.kind) {
    case Stmt::Kind::Assign:
      if (global_target)
        fx.effect = true;
      else
        fx.defs.insert(stmt.name);
      break;
    case Stmt::Kind::Alloc:
      fx.effect = true;
      if (!global_target) fx.defs.insert(stmt.name);
      break;
    case Stmt::Kind::FieldStore:
      fx.effect = true;
      if (!global_target) fx.uses.insert(stmt.name);
      break;
    case Stmt::Kind::CallStmt:
    case Stmt::Kind::Print:
    case Stmt::Kind::Snapshot:
    case Stmt::Kind::Return: fx.effect = true; break;
    case Stmt::Kind::If:
    case Stmt::Kind::While: break;
  }
  for (const auto* nested : {&stmt.body, &stmt.else_body}) {
    for (const Stmt& s : *nested) {
      StmtEffects inner = effects_of(s, program);
      fx.defs.insert(inner.defs.begin(), inner.defs.end());
      fx.uses.insert(inner.uses.begin(), inner.uses.end());
      fx.effect = fx.effect || inner.effect;
    }
  }
  return fx;
}

std::vector<std::string> locals_of(const Function& function, const Program& program) {
  std::vector<std::string> order;
  NameSet seen;
  for (const std::string& p : function.params) note_local(p, program, order, seen);
  locals_in_body(function.body, program, order, seen);
  return order;
}

NameSet all_names(const Program& program) {
  NameSet out(program.globals.begin(), program.globals.end());
  for (const Function& f : program.functions) {
    out.insert(f.name);
    out.insert(f.params.begin(), f.params.end());
    names_in_body(f.body, out);
  }
  return out;
}

std::string fresh_name(const std::string& base, const NameSet& taken) {
  if (!taken.contains(base)) return base;
  for (int i = 2;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!taken.contains(candidate)) return candidate;
  }
}

}  // namespace graphmark::lang
