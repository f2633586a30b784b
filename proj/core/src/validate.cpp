#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"

namespace graphmark::lang {
namespace {

using NameSet = std::set<std::string, std::less<>>;

class FunctionChecker {
 public:
  FunctionChecker(const Program& program, const Function& function,
                  const std::unordered_map<std::string, std::size_t>& arity)
      : program_(program), function_(function), arity_(arity) {}

  void run() {
    NameSet defined(function_.params.begin(), function_.params.end());
    body(function_.body, defined);
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ValidationError("in function '" + function_.name + "': " + message);
  }

  void use(const std::string& name, const NameSet& defined) const {
    if (program_.has_global(name) || defined.contains(name)) return;
    fail("use of '" + name + "' before assignment");
  }

  void check_call(const std::string& callee, std::size_t argc) const {
    auto it = arity_.find(callee);
    if (it == arity_.end()) fail("call to undefined function '" + callee + "'");
    if (it->second != argc)
      fail("'" + callee + "' expects " + std::to_string(it->second) + " argument(s), got " +
           std::to_string(argc));
  }

  void expr(const Expr& e, const NameSet& defined) const {
    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::NullLit: return;
      case Expr::Kind::Var:
      case Expr::Kind::FieldLoad:
      case Expr::Kind::IsNull: use(e.name, defined); return;
      case Expr::Kind::Call: check_call(e.name, e.operands.size()); break;
      case Expr::Kind::Binary:
      case Expr::Kind::Neg: break;
    }
    for (const Expr& op : e.operands) expr(op, defined);
  }

  // Returns true when every path through `stmts` ends in a return.
  bool body(const std::vector<Stmt>& stmts, NameSet& defined) const {
    bool terminated = false;
    for (const Stmt& s : stmts) {
      switch (s.kind) {
        case Stmt::Kind::Assign:
          expr(s.expr, defined);
          defined.insert(s.name);
          break;
        case Stmt::Kind::Alloc: defined.insert(s.name); break;
        case Stmt::Kind::FieldStore:
          use(s.name, defined);
          expr(s.expr, defined);
          break;
        case Stmt::Kind::If: {
          expr(s.expr, defined);
          NameSet then_defined = defined;
          NameSet else_defined = defined;
          const bool then_ends = body(s.body, then_defined);
          const bool else_ends = body(s.else_body, else_defined);
          if (then_ends && else_ends) {
            terminated = true;
          } else if (then_ends) {
            defined = std::move(else_defined);
          } else if (else_ends) {
            defined = std::move(then_defined);
          } else {
            NameSet both;
            for (const std::string& n : then_defined)
              if (else_defined.contains(n)) both.insert(n);
            defined = std::move(both);
          }
          break;
        }
        case Stmt::Kind::While: {
          expr(s.expr, defined);
          NameSet inner = defined;
          body(s.body, inner);
          break;
        }
        case Stmt::Kind::CallStmt:
          check_call(s.name, s.args.size());
          for (const Expr& a : s.args) expr(a, defined);
          break;
        case Stmt::Kind::Return:
          expr(s.expr, defined);
          terminated = true;
          break;
        case Stmt::Kind::Print: expr(s.expr, defined); break;
        case Stmt::Kind::Snapshot: break;
      }
    }
    return terminated;
  }

  const Program& program_;
  const Function& function_;
  const std::unordered_map<std::string, std::size_t>& arity_;
};

}  // namespace

void validate(const Program& program) {
  std::unordered_set<std::string> globals;
  for (const std::string& g : program.globals)
    if (!globals.insert(g).second) throw ValidationError("duplicate global '" + g + "'");

  std::unordered_map<std::string, std::size_t> arity;
  for (const Function& f : program.functions) {
    if (!arity.emplace(f.name, f.params.size()).second)
      throw ValidationError("duplicate function '" + f.name + "'");
    if (globals.contains(f.name))
      throw ValidationError("function '" + f.name + "' has the same name as a global");
  }
  if (!arity.contains("main")) throw ValidationError("program has no 'main' function");

  for (const Function& f : program.functions) {
    std::unordered_set<std::string> params;
    for (const std::string& p : f.params) {
      if (!params.insert(p).second)
        throw ValidationError("in function '" + f.name + "': duplicate parameter '" + p + "'");
      if (globals.contains(p))
        throw ValidationError("in function '" + f.name + "': parameter '" + p + "' shadows a global");
    }
    FunctionChecker(program, f, arity).run();
  }
}

}  // namespace graphmark::lang
