#include "graphmark/interpreter.hpp"

#include <limits>
#include <unordered_map>
#include <utility>

namespace graphmark::lang {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::StepLimit: return "step-limit";
    case RunStatus::HeapLimit: return "heap-limit";
    case RunStatus::DivisionByZero: return "division-by-zero";
    case RunStatus::NullDereference: return "null-dereference";
    case RunStatus::Overflow: return "overflow";
    case RunStatus::TypeError: return "type-error";
    case RunStatus::CallDepthLimit: return "call-depth-limit";
    case RunStatus::BadArguments: return "bad-arguments";
  }
  return "unknown";
}

namespace {

struct Value {
  enum class Tag : std::uint8_t { Unset, Int, Null, Ref };
  Tag tag = Tag::Unset;
  std::int64_t bits = 0;

  static Value integer(std::int64_t v) { return {Tag::Int, v}; }
  static Value null() { return {Tag::Null, 0}; }
  static Value ref(HeapId id) { return {Tag::Ref, static_cast<std::int64_t>(id)}; }

  bool is_int() const { return tag == Tag::Int; }
  bool is_ref() const { return tag == Tag::Ref; }
  HeapId id() const { return static_cast<HeapId>(bits); }
};

struct Cell {
  Value left = Value::null();
  Value right = Value::null();
  Value data = Value::integer(0);
};

// Programs are lowered once: variable names become frame slots or global
// indices, callees become function indices.
struct VarRef {
  bool global = false;
  std::uint32_t index = 0;
};

struct CExpr {
  Expr::Kind kind = Expr::Kind::IntLit;
  std::int64_t value = 0;
  VarRef var;
  Field field = Field::Data;
  BinaryOp op = BinaryOp::Add;
  std::uint32_t callee = 0;
  std::vector<CExpr> ops;
};

struct CStmt {
  Stmt::Kind kind = Stmt::Kind::Print;
  VarRef var;
  Field field = Field::Data;
  CExpr expr;
  std::uint32_t callee = 0;
  std::vector<CExpr> args;
  std::vector<CStmt> body;
  std::vector<CStmt> else_body;
};

struct CFunction {
  std::uint32_t param_count = 0;
  std::uint32_t slot_count = 0;
  std::vector<CStmt> body;
};

struct CProgram {
  std::vector<std::string> global_names;
  std::vector<CFunction> functions;
  std::uint32_t main = 0;
};

class Lowering {
 public:
  explicit Lowering(const Program& program) : program_(program) {
    for (std::size_t i = 0; i < program.globals.size(); ++i)
      globals_.emplace(program.globals[i], static_cast<std::uint32_t>(i));
    for (std::size_t i = 0; i < program.functions.size(); ++i)
      functions_.emplace(program.functions[i].name, static_cast<std::uint32_t>(i));
  }

  CProgram run() {
    CProgram out;
    out.global_names = program_.globals;
    for (const Function& f : program_.functions) out.functions.push_back(function(f));
    auto it = functions_.find("main");
    out.main = it == functions_.end() ? std::numeric_limits<std::uint32_t>::max() : it->second;
    return out;
  }

 private:
  CFunction function(const Function& f) {
    slots_.clear();
    for (const std::string& p : f.params) slot(p);
    CFunction out;
    out.param_count = static_cast<std::uint32_t>(f.params.size());
    out.body = body(f.body);
    out.slot_count = static_cast<std::uint32_t>(slots_.size());
    return out;
  }

  std::uint32_t slot(const std::string& name) {
    auto [it, inserted] = slots_.emplace(name, static_cast<std::uint32_t>(slots_.size()));
    return it->second;
  }

  VarRef var(const std::string& name) {
    if (auto g = globals_.find(name); g != globals_.end()) return {true, g->second};
    return {false, slot(name)};
  }

  std::uint32_t callee(const std::string& name) const {
    auto it = functions_.find(name);
    return it == functions_.end() ? std::numeric_limits<std::uint32_t>::max() : it->second;
  }

  CExpr expr(const Expr& e) {
    CExpr out;
    out.kind = e.kind;
    out.value = e.value;
    out.field = e.field;
    out.op = e.op;
    switch (e.kind) {
      case Expr::Kind::Var:
      case Expr::Kind::FieldLoad:
      case Expr::Kind::IsNull: out.var = var(e.name); break;
      case Expr::Kind::Call: out.callee = callee(e.name); break;
      default: break;
    }
    out.ops.reserve(e.operands.size());
    for (const Expr& op : e.operands) out.ops.push_back(expr(op));
    return out;
  }

  std::vector<CStmt> body(const std::vector<Stmt>& stmts) {
    std::vector<CStmt> out;
    out.reserve(stmts.size());
    for (const Stmt& s : stmts) {
      CStmt c;
      c.kind = s.kind;
      c.field = s.field;
      switch (s.kind) {
        case Stmt::Kind::Assign:
        case Stmt::Kind::Alloc:
        case Stmt::Kind::FieldStore: c.var = var(s.name); break;
        case Stmt::Kind::CallStmt: c.callee = callee(s.name); break;
        default: break;
      }
      c.expr = expr(s.expr);
      for (const Expr& a : s.args) c.args.push_back(expr(a));
      c.body = body(s.body);
      c.else_body = body(s.else_body);
      out.push_back(std::move(c));
    }
    return out;
  }

  const Program& program_;
  std::unordered_map<std::string, std::uint32_t> globals_;
  std::unordered_map<std::string, std::uint32_t> functions_;
  std::unordered_map<std::string, std::uint32_t> slots_;
};

struct Trap {
  RunStatus status;
  std::string detail;
};

class Machine {
 public:
  Machine(const CProgram& program, const RunLimits& limits, RunResult& result)
      : program_(program), limits_(limits), result_(result), globals_(program.global_names.size(), Value::null()) {}

  void run(std::span<const std::int64_t> args) {
    if (program_.main >= program_.functions.size()) throw Trap{RunStatus::BadArguments, "no main function"};
    const CFunction& main = program_.functions[program_.main];
    if (args.size() != main.param_count)
      throw Trap{RunStatus::BadArguments, "main expects " + std::to_string(main.param_count) +
                                              " argument(s), got " + std::to_string(args.size())};
    std::vector<Value> values;
    values.reserve(args.size());
    for (std::int64_t a : args) values.push_back(Value::integer(a));
    call(program_.main, std::move(values));
  }

 private:
  enum class Flow { Next, Return };

  class FrameGuard {
   public:
    FrameGuard(std::vector<std::vector<Value>*>& frames, std::vector<Value>* locals) : frames_(frames) {
      frames_.push_back(locals);
    }
    ~FrameGuard() { frames_.pop_back(); }
    FrameGuard(const FrameGuard&) = delete;
    FrameGuard& operator=(const FrameGuard&) = delete;

   private:
    std::vector<std::vector<Value>*>& frames_;
  };

  [[noreturn]] static void trap(RunStatus status, std::string detail) { throw Trap{status, std::move(detail)}; }

  void tick() {
    if (result_.steps >= limits_.max_steps) trap(RunStatus::StepLimit, "step limit reached");
    ++result_.steps;
  }

  Value call(std::uint32_t index, std::vector<Value> args) {
    if (frames_.size() >= limits_.max_call_depth) trap(RunStatus::CallDepthLimit, "call depth limit reached");
    const CFunction& f = program_.functions[index];
    std::vector<Value> locals(f.slot_count);
    for (std::size_t i = 0; i < args.size(); ++i) locals[i] = args[i];
    FrameGuard guard(frames_, &locals);
    Value ret = Value::null();
    exec(f.body, locals, ret);
    return ret;
  }

  Value read(const VarRef& ref, const std::vector<Value>& locals) const {
    const Value v = ref.global ? globals_[ref.index] : locals[ref.index];
    if (v.tag == Value::Tag::Unset) trap(RunStatus::TypeError, "read of an unassigned variable");
    return v;
  }

  void write(const VarRef& ref, std::vector<Value>& locals, Value v) {
    (ref.global ? globals_[ref.index] : locals[ref.index]) = v;
  }

  Cell& deref(Value v) {
    if (v.tag == Value::Tag::Null) trap(RunStatus::NullDereference, "field access on null");
    if (!v.is_ref()) trap(RunStatus::TypeError, "field access on a non-node value");
    return heap_[v.id()];
  }

  static std::int64_t as_int(Value v, const char* what) {
    if (!v.is_int()) trap(RunStatus::TypeError, std::string(what) + " needs an integer");
    return v.bits;
  }

  static Value& field_of(Cell& cell, Field f) {
    switch (f) {
      case Field::Left: return cell.left;
      case Field::Right: return cell.right;
      case Field::Data: return cell.data;
    }
    return cell.data;
  }

  Value arithmetic(BinaryOp op, std::int64_t a, std::int64_t b) {
    std::int64_t out = 0;
    switch (op) {
      case BinaryOp::Add:
        if (__builtin_add_overflow(a, b, &out)) trap(RunStatus::Overflow, "integer overflow in +");
        return Value::integer(out);
      case BinaryOp::Sub:
        if (__builtin_sub_overflow(a, b, &out)) trap(RunStatus::Overflow, "integer overflow in -");
        return Value::integer(out);
      case BinaryOp::Mul:
        if (__builtin_mul_overflow(a, b, &out)) trap(RunStatus::Overflow, "integer overflow in *");
        return Value::integer(out);
      case BinaryOp::Div:
        if (b == 0) trap(RunStatus::DivisionByZero, "division by zero");
        if (a == std::numeric_limits<std::int64_t>::min() && b == -1)
          trap(RunStatus::Overflow, "integer overflow in /");
        return Value::integer(a / b);
      case BinaryOp::Mod:
        if (b == 0) trap(RunStatus::DivisionByZero, "modulo by zero");
        if (b == -1) return Value::integer(0);
        return Value::integer(a % b);
      case BinaryOp::Lt: return Value::integer(a < b);
      case BinaryOp::Le: return Value::integer(a <= b);
      case BinaryOp::Gt: return Value::integer(a > b);
      case BinaryOp::Ge: return Value::integer(a >= b);
      default: break;
    }
    trap(RunStatus::TypeError, "unsupported operator");
  }

  static bool same(Value a, Value b) {
    if (a.is_int() != b.is_int()) trap(RunStatus::TypeError, "== compares an integer with a reference");
    if (a.tag != b.tag) return false;
    return a.tag == Value::Tag::Null || a.bits == b.bits;
  }

  Value eval(const CExpr& e, std::vector<Value>& locals) {
    switch (e.kind) {
      case Expr::Kind::IntLit: return Value::integer(e.value);
      case Expr::Kind::NullLit: return Value::null();
      case Expr::Kind::Var: return read(e.var, locals);
      case Expr::Kind::FieldLoad: return field_of(deref(read(e.var, locals)), e.field);
      case Expr::Kind::IsNull: return Value::integer(read(e.var, locals).tag == Value::Tag::Null);
      case Expr::Kind::Neg: {
        const std::int64_t v = as_int(eval(e.ops[0], locals), "unary -");
        if (v == std::numeric_limits<std::int64_t>::min()) trap(RunStatus::Overflow, "integer overflow in unary -");
        return Value::integer(-v);
      }
      case Expr::Kind::Call: {
        std::vector<Value> args;
        args.reserve(e.ops.size());
        for (const CExpr& a : e.ops) args.push_back(eval(a, locals));
        return call(e.callee, std::move(args));
      }
      case Expr::Kind::Binary: {
        if (e.op == BinaryOp::And || e.op == BinaryOp::Or) {
          const bool lhs = as_int(eval(e.ops[0], locals), "logical operator") != 0;
          if (e.op == BinaryOp::And && !lhs) return Value::integer(0);
          if (e.op == BinaryOp::Or && lhs) return Value::integer(1);
          return Value::integer(as_int(eval(e.ops[1], locals), "logical operator") != 0);
        }
        const Value lhs = eval(e.ops[0], locals);
        const Value rhs = eval(e.ops[1], locals);
        if (e.op == BinaryOp::Eq) return Value::integer(same(lhs, rhs));
        if (e.op == BinaryOp::Ne) return Value::integer(!same(lhs, rhs));
        return arithmetic(e.op, as_int(lhs, "arithmetic"), as_int(rhs, "arithmetic"));
      }
    }
    trap(RunStatus::TypeError, "unknown expression");
  }

  Flow exec(const std::vector<CStmt>& body, std::vector<Value>& locals, Value& ret) {
    for (const CStmt& s : body) {
      if (s.kind != Stmt::Kind::While) tick();
      switch (s.kind) {
        case Stmt::Kind::Assign: write(s.var, locals, eval(s.expr, locals)); break;
        case Stmt::Kind::Alloc: allocate(s.var, locals); break;
        case Stmt::Kind::FieldStore: {
          const Value target = read(s.var, locals);
          deref(target);
          const Value v = eval(s.expr, locals);
          if (s.field != Field::Data && v.is_int())
            trap(RunStatus::TypeError, "left/right fields hold node references only");
          // Re-resolve after evaluation: a call in the value may have grown the heap.
          field_of(heap_[target.id()], s.field) = v;
          break;
        }
        case Stmt::Kind::If:
          if (as_int(eval(s.expr, locals), "if condition") != 0) {
            if (exec(s.body, locals, ret) == Flow::Return) return Flow::Return;
          } else if (exec(s.else_body, locals, ret) == Flow::Return) {
            return Flow::Return;
          }
          break;
        case Stmt::Kind::While:
          while (true) {
            tick();
            if (as_int(eval(s.expr, locals), "while condition") == 0) break;
            if (exec(s.body, locals, ret) == Flow::Return) return Flow::Return;
          }
          break;
        case Stmt::Kind::CallStmt: {
          std::vector<Value> args;
          args.reserve(s.args.size());
          for (const CExpr& a : s.args) args.push_back(eval(a, locals));
          call(s.callee, std::move(args));
          break;
        }
        case Stmt::Kind::Return: ret = eval(s.expr, locals); return Flow::Return;
        case Stmt::Kind::Print:
          result_.output.push_back(std::to_string(as_int(eval(s.expr, locals), "print")));
          break;
        case Stmt::Kind::Snapshot:
          if (!result_.snapshot) result_.snapshot = capture();
          break;
      }
    }
    return Flow::Next;
  }

  void allocate(const VarRef& ref, std::vector<Value>& locals) {
    if (result_.total_allocations >= limits_.max_allocations) trap(RunStatus::HeapLimit, "allocation limit reached");
    heap_.push_back(Cell{});
    ++result_.total_allocations;
    write(ref, locals, Value::ref(static_cast<HeapId>(heap_.size() - 1)));
    const std::uint64_t live = count_live();
    if (live > result_.peak_live_nodes) result_.peak_live_nodes = live;
  }

  std::uint64_t count_live() {
    marks_.resize(heap_.size(), 0);
    ++epoch_;
    std::uint64_t count = 0;
    std::vector<HeapId> work;
    auto visit = [&](Value v) {
      if (v.is_ref() && marks_[v.id()] != epoch_) {
        marks_[v.id()] = epoch_;
        ++count;
        work.push_back(v.id());
      }
    };
    for (const Value& g : globals_) visit(g);
    for (const std::vector<Value>* frame : frames_)
      for (const Value& v : *frame) visit(v);
    while (!work.empty()) {
      const Cell& c = heap_[work.back()];
      work.pop_back();
      visit(c.left);
      visit(c.right);
      visit(c.data);
    }
    return count;
  }

  HeapSnapshot capture() const {
    HeapSnapshot snap;
    snap.cells.reserve(heap_.size());
    for (const Cell& c : heap_) {
      HeapCell cell;
      if (c.left.is_ref()) cell.left = c.left.id();
      if (c.right.is_ref()) cell.right = c.right.id();
      if (c.data.is_int()) cell.data = c.data.bits;
      snap.cells.push_back(cell);
    }
    for (std::size_t i = 0; i < globals_.size(); ++i)
      if (globals_[i].is_ref()) snap.anchors.emplace_back(program_.global_names[i], globals_[i].id());
    return snap;
  }

  const CProgram& program_;
  const RunLimits& limits_;
  RunResult& result_;
  std::vector<Value> globals_;
  std::vector<Cell> heap_;
  std::vector<std::vector<Value>*> frames_;
  std::vector<std::uint32_t> marks_;
  std::uint32_t epoch_ = 0;
};

}  // namespace

RunResult interpret(const Program& program, std::span<const std::int64_t> args, const RunLimits& limits) {
  const CProgram lowered = Lowering(program).run();
  RunResult result;
  Machine machine(lowered, limits, result);
  try {
    machine.run(args);
  } catch (const Trap& t) {
    result.status = t.status;
    result.error_detail = t.detail;
  }
  return result;
}

}  // namespace graphmark::lang
