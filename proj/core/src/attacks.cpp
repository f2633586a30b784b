#include "graphmark/attacks.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "graphmark/analysis.hpp"
#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"

namespace graphmark::attacks {
namespace {

using lang::Expr;
using lang::NameSet;
using lang::Program;
using lang::Stmt;
using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

bool intersects(const NameSet& a, const NameSet& b) {
  return std::any_of(a.begin(), a.end(), [&](const std::string& n) { return b.contains(n); });
}

template <class F>
void for_each_body(std::vector<Stmt>& body, F& f) {
  f(body);
  for (Stmt& s : body) {
    for_each_body(s.body, f);
    for_each_body(s.else_body, f);
  }
}

template <class F>
void for_each_expr(Expr& e, F& f) {
  f(e);
  for (Expr& op : e.operands) for_each_expr(op, f);
}

template <class F>
void for_each_expr(std::vector<Stmt>& body, F& f) {
  for (Stmt& s : body) {
    if (s.kind != Stmt::Kind::Alloc && s.kind != Stmt::Kind::Snapshot) for_each_expr(s.expr, f);
    for (Expr& a : s.args) for_each_expr(a, f);
    for_each_expr(s.body, f);
    for_each_expr(s.else_body, f);
  }
}

bool contains_return(const std::vector<Stmt>& body) {
  return std::any_of(body.begin(), body.end(), [](const Stmt& s) {
    return s.kind == Stmt::Kind::Return || contains_return(s.body) || contains_return(s.else_body);
  });
}

bool is_local_ref(const Expr& e, const std::string& name) {
  return (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::FieldLoad || e.kind == Expr::Kind::IsNull) &&
         e.name == name;
}

// ---------------------------------------------------------------------------
// reorder

void shuffle_block(std::vector<Stmt>& body, std::size_t begin, std::size_t end, const Program& program, Rng& rng) {
  const std::size_t n = end - begin;
  if (n < 2) return;
  std::vector<lang::StmtEffects> fx;
  for (std::size_t i = begin; i < end; ++i) fx.push_back(lang::effects_of(body[i], program));
  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> pending(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool dep = (fx[i].effect && fx[j].effect) || intersects(fx[i].defs, fx[j].uses) ||
                       intersects(fx[i].uses, fx[j].defs) || intersects(fx[i].defs, fx[j].defs);
      if (dep) {
        succ[i].push_back(j);
        ++pending[j];
      }
    }
  }
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (pending[i] == 0) ready.push_back(i);
  std::vector<Stmt> ordered;
  ordered.reserve(n);
  while (!ready.empty()) {
    const std::size_t k = pick(rng, ready.size());
    const std::size_t i = ready[k];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(k));
    ordered.push_back(std::move(body[begin + i]));
    for (std::size_t j : succ[i])
      if (--pending[j] == 0) ready.push_back(j);
  }
  std::move(ordered.begin(), ordered.end(), body.begin() + static_cast<std::ptrdiff_t>(begin));
}

void reorder_body(std::vector<Stmt>& body, const Program& program, Rng& rng) {
  std::size_t start = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i < body.size() && !body[i].is_control_flow()) continue;
    shuffle_block(body, start, i, program, rng);
    if (i < body.size()) {
      reorder_body(body[i].body, program, rng);
      reorder_body(body[i].else_body, program, rng);
    }
    start = i + 1;
  }
}

// ---------------------------------------------------------------------------
// split_function

// Locals certainly assigned after `body` runs (no returns inside).
void definitely_assigned(const std::vector<Stmt>& body, const Program& program, NameSet& defined) {
  for (const Stmt& s : body) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
      case Stmt::Kind::Alloc:
        if (!program.has_global(s.name)) defined.insert(s.name);
        break;
      case Stmt::Kind::If: {
        NameSet a = defined;
        NameSet b = defined;
        definitely_assigned(s.body, program, a);
        definitely_assigned(s.else_body, program, b);
        for (const std::string& n : a)
          if (b.contains(n)) defined.insert(n);
        break;
      }
      default: break;
    }
  }
}

void names_in(const std::vector<Stmt>& body, const Program& program, NameSet& out) {
  for (const Stmt& s : body) {
    const lang::StmtEffects fx = lang::effects_of(s, program);
    out.insert(fx.uses.begin(), fx.uses.end());
    out.insert(fx.defs.begin(), fx.defs.end());
  }
}

Program split_at(const Program& program, std::size_t index) {
  Program out = program;
  lang::Function& f = out.functions[index];
  const std::size_t mid = f.body.size() / 2;
  std::vector<Stmt> first(std::make_move_iterator(f.body.begin()),
                          std::make_move_iterator(f.body.begin() + static_cast<std::ptrdiff_t>(mid)));
  std::vector<Stmt> second(std::make_move_iterator(f.body.begin() + static_cast<std::ptrdiff_t>(mid)),
                           std::make_move_iterator(f.body.end()));

  NameSet assigned(f.params.begin(), f.params.end());
  definitely_assigned(first, program, assigned);
  NameSet later;
  names_in(second, program, later);
  std::vector<std::string> carried;
  for (const std::string& v : lang::locals_of(program.functions[index], program))
    if (assigned.contains(v) && later.contains(v)) carried.push_back(v);

  const NameSet taken = lang::all_names(program);
  lang::Function helper;
  helper.name = lang::fresh_name(f.name + "__split", taken);
  helper.params = f.params;
  helper.body = std::move(first);

  std::vector<Expr> args;
  for (const std::string& p : f.params) args.push_back(Expr::var(p));

  std::vector<Stmt> prologue;
  if (carried.empty()) {
    prologue.push_back(Stmt::call(helper.name, std::move(args)));
  } else {
    NameSet reserved = taken;
    reserved.insert(helper.name);
    const std::string pack = lang::fresh_name("pack", reserved);
    reserved.insert(pack);
    const std::string link = lang::fresh_name("link", reserved);
    helper.body.push_back(Stmt::alloc(pack));
    helper.body.push_back(Stmt::field_store(pack, lang::Field::Data, Expr::var(carried.back())));
    for (std::size_t i = carried.size() - 1; i-- > 0;) {
      helper.body.push_back(Stmt::alloc(link));
      helper.body.push_back(Stmt::field_store(link, lang::Field::Data, Expr::var(carried[i])));
      helper.body.push_back(Stmt::field_store(link, lang::Field::Right, Expr::var(pack)));
      helper.body.push_back(Stmt::assign(pack, Expr::var(link)));
    }
    helper.body.push_back(Stmt::ret(Expr::var(pack)));

    prologue.push_back(Stmt::assign(pack, Expr::call(helper.name, std::move(args))));
    for (std::size_t i = 0; i < carried.size(); ++i) {
      if (i > 0) prologue.push_back(Stmt::assign(pack, Expr::load(pack, lang::Field::Right)));
      prologue.push_back(Stmt::assign(carried[i], Expr::load(pack, lang::Field::Data)));
    }
  }
  f.body = std::move(prologue);
  std::move(second.begin(), second.end(), std::back_inserter(f.body));
  out.functions.push_back(std::move(helper));
  return out;
}

// ---------------------------------------------------------------------------
// duplicate_variable

struct ShadowCopies {
  const std::string& var;
  const std::string& shadow;

  void operator()(std::vector<Stmt>& body) const {
    for (std::size_t i = 0; i < body.size(); ++i) {
      const Stmt& s = body[i];
      if ((s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::Alloc) && s.name == var) {
        body.insert(body.begin() + static_cast<std::ptrdiff_t>(i) + 1, Stmt::assign(shadow, Expr::var(var)));
        ++i;
      }
    }
  }
};

void collect_uses(std::vector<Stmt>& body, const std::string& var, const std::string& shadow,
                  std::vector<std::string*>& out) {
  for (Stmt& s : body) {
    const bool is_copy = s.kind == Stmt::Kind::Assign && s.name == shadow;
    if (!is_copy) {
      auto visit = [&](Expr& e) {
        if (is_local_ref(e, var)) out.push_back(&e.name);
      };
      if (s.kind != Stmt::Kind::Alloc && s.kind != Stmt::Kind::Snapshot) for_each_expr(s.expr, visit);
      for (Expr& a : s.args) for_each_expr(a, visit);
      if (s.kind == Stmt::Kind::FieldStore && s.name == var) out.push_back(&s.name);
    }
    collect_uses(s.body, var, shadow, out);
    collect_uses(s.else_body, var, shadow, out);
  }
}

// ---------------------------------------------------------------------------
// reassign_variables

class Liveness {
 public:
  explicit Liveness(const Program& program) : program_(program) {}

  NameSet body(const std::vector<Stmt>& stmts, NameSet live) {
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it) live = stmt(*it, std::move(live));
    return live;
  }

  /// Pairs of locals that may not share a name.
  std::set<std::pair<std::string, std::string>> interference;

 private:
  void interfere(const std::string& a, const std::string& b) {
    if (a == b) return;
    interference.emplace(std::min(a, b), std::max(a, b));
  }

  void uses(const Expr& e, NameSet& live) const { lang::collect_uses(e, program_, live); }

  NameSet stmt(const Stmt& s, NameSet live) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
      case Stmt::Kind::Alloc:
        if (!program_.has_global(s.name)) {
          for (const std::string& other : live) interfere(s.name, other);
          live.erase(s.name);
        }
        if (s.kind == Stmt::Kind::Assign) uses(s.expr, live);
        return live;
      case Stmt::Kind::FieldStore:
        if (!program_.has_global(s.name)) live.insert(s.name);
        uses(s.expr, live);
        return live;
      case Stmt::Kind::CallStmt:
        for (const Expr& a : s.args) uses(a, live);
        return live;
      case Stmt::Kind::Return: {
        NameSet fresh;
        uses(s.expr, fresh);
        return fresh;
      }
      case Stmt::Kind::Print: uses(s.expr, live); return live;
      case Stmt::Kind::Snapshot: return live;
      case Stmt::Kind::If: {
        NameSet a = body(s.body, live);
        NameSet b = body(s.else_body, live);
        a.insert(b.begin(), b.end());
        uses(s.expr, a);
        return a;
      }
      case Stmt::Kind::While: {
        NameSet head = live;
        uses(s.expr, head);
        for (;;) {
          NameSet next = body(s.body, head);
          next.insert(live.begin(), live.end());
          uses(s.expr, next);
          if (next == head) break;
          head = std::move(next);
        }
        return head;
      }
    }
    return live;
  }

  const Program& program_;
};

void rename_locals(lang::Function& f, const std::map<std::string, std::string, std::less<>>& to) {
  auto rename = [&](std::string& name) {
    if (auto it = to.find(name); it != to.end()) name = it->second;
  };
  auto visit_expr = [&](Expr& e) {
    if (e.kind == Expr::Kind::Var || e.kind == Expr::Kind::FieldLoad || e.kind == Expr::Kind::IsNull) rename(e.name);
  };
  auto visit_body = [&](std::vector<Stmt>& body) {
    for (Stmt& s : body)
      if (s.kind == Stmt::Kind::Assign || s.kind == Stmt::Kind::Alloc || s.kind == Stmt::Kind::FieldStore)
        rename(s.name);
  };
  for_each_body(f.body, visit_body);
  for_each_expr(f.body, visit_expr);
}

std::vector<std::string> run_outputs(const Program& program, const Inputs& inputs, const lang::RunLimits& limits,
                                     bool& all_ok) {
  std::vector<std::string> out;
  all_ok = true;
  for (const auto& args : inputs) {
    const lang::RunResult r = lang::interpret(program, args, limits);
    all_ok = all_ok && r.ok();
    out.insert(out.end(), r.output.begin(), r.output.end());
    out.emplace_back("\x1f");
  }
  return out;
}

}  // namespace

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Reorder: return "reorder";
    case AttackKind::SplitFunction: return "split_function";
    case AttackKind::DuplicateVariable: return "duplicate_variable";
    case AttackKind::BogusField: return "bogus_field";
    case AttackKind::ReassignVariables: return "reassign_variables";
  }
  return "?";
}

std::optional<AttackKind> parse_attack(std::string_view name) {
  for (AttackKind k : kAllAttacks)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

bool is_adapted(AttackKind kind) {
  return kind == AttackKind::SplitFunction || kind == AttackKind::DuplicateVariable;
}

std::string_view to_string(Verdict verdict) { return verdict == Verdict::NotAffected ? "Not affected" : "Affected"; }

Program reorder(const Program& program, std::uint64_t seed) {
  Rng rng(seed);
  Program out = program;
  for (lang::Function& f : out.functions) reorder_body(f.body, program, rng);
  return out;
}

Program split_function(const Program& program, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    const auto& body = program.functions[i].body;
    if (body.size() < 2) continue;
    const std::vector<Stmt> first(body.begin(), body.begin() + static_cast<std::ptrdiff_t>(body.size() / 2));
    if (!contains_return(first)) eligible.push_back(i);
  }
  if (eligible.empty()) return program;
  Rng rng(seed);
  return split_at(program, eligible[pick(rng, eligible.size())]);
}

Program duplicate_variable(const Program& program, std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < program.functions.size(); ++i)
    if (!lang::locals_of(program.functions[i], program).empty()) candidates.push_back(i);
  if (candidates.empty()) return program;

  Rng rng(seed);
  Program out = program;
  lang::Function& f = out.functions[candidates[pick(rng, candidates.size())]];
  const std::vector<std::string> locals = lang::locals_of(f, program);
  const std::string var = locals[pick(rng, locals.size())];
  const std::string shadow = lang::fresh_name(var, lang::all_names(program));

  ShadowCopies copies{var, shadow};
  for_each_body(f.body, copies);
  if (std::find(f.params.begin(), f.params.end(), var) != f.params.end())
    f.body.insert(f.body.begin(), Stmt::assign(shadow, Expr::var(var)));

  std::vector<std::string*> uses;
  collect_uses(f.body, var, shadow, uses);
  if (!uses.empty()) {
    std::vector<std::string*> chosen;
    for (std::string* u : uses)
      if (rng() % 2 == 0) chosen.push_back(u);
    if (chosen.empty()) chosen.push_back(uses[pick(rng, uses.size())]);
    for (std::string* u : chosen) *u = shadow;
  }
  return out;
}

Program bogus_field(const Program& program, std::uint64_t seed) {
  Program out = program;
  bool reads_data = false;
  auto find_data = [&](Expr& e) {
    reads_data = reads_data || (e.kind == Expr::Kind::FieldLoad && e.field == lang::Field::Data);
  };
  for (lang::Function& f : out.functions) for_each_expr(f.body, find_data);
  if (reads_data) return program;

  std::vector<std::pair<std::vector<Stmt>*, std::size_t>> allocs;
  auto find_allocs = [&](std::vector<Stmt>& body) {
    for (std::size_t i = 0; i < body.size(); ++i)
      if (body[i].kind == Stmt::Kind::Alloc) allocs.emplace_back(&body, i);
  };
  for (lang::Function& f : out.functions) for_each_body(f.body, find_allocs);
  if (allocs.empty()) return program;

  Rng rng(seed);
  std::vector<bool> chosen(allocs.size());
  for (std::size_t i = 0; i < allocs.size(); ++i) chosen[i] = rng() % 2 == 0;
  if (std::none_of(chosen.begin(), chosen.end(), [](bool b) { return b; })) chosen[pick(rng, allocs.size())] = true;
  // Insert back to front so earlier indices in the same body stay valid.
  for (std::size_t i = allocs.size(); i-- > 0;) {
    if (!chosen[i]) continue;
    auto [body, at] = allocs[i];
    const std::int64_t k = static_cast<std::int64_t>(rng() % 1000);
    body->insert(body->begin() + static_cast<std::ptrdiff_t>(at) + 1,
                 Stmt::field_store((*body)[at].name, lang::Field::Data, Expr::integer(k)));
  }
  return out;
}

Program reassign_variables(const Program& program) {
  Program out = program;
  for (lang::Function& f : out.functions) {
    const std::vector<std::string> locals = lang::locals_of(f, program);
    if (locals.size() < 2) continue;
    Liveness live(program);
    const NameSet at_entry = live.body(f.body, {});
    auto clash = [&](const std::string& a, const std::string& b) {
      return live.interference.contains({std::min(a, b), std::max(a, b)});
    };
    NameSet params(f.params.begin(), f.params.end());
    auto entry_clash = [&](const std::string& a, const std::string& b) {
      const bool a_in = params.contains(a) || at_entry.contains(a);
      const bool b_in = params.contains(b) || at_entry.contains(b);
      return a_in && b_in;
    };

    std::vector<std::vector<std::string>> classes;
    std::map<std::string, std::string, std::less<>> rename;
    for (const std::string& v : locals) {
      bool placed = false;
      for (auto& members : classes) {
        const bool ok = std::none_of(members.begin(), members.end(), [&](const std::string& m) {
          return clash(v, m) || entry_clash(v, m);
        });
        if (ok) {
          members.push_back(v);
          if (members.front() != v) rename.emplace(v, members.front());
          placed = true;
          break;
        }
      }
      if (!placed) classes.push_back({v});
    }
    if (!rename.empty()) rename_locals(f, rename);
  }
  return out;
}

Program apply(AttackKind kind, const Program& program, std::uint64_t seed) {
  switch (kind) {
    case AttackKind::Reorder: return reorder(program, seed);
    case AttackKind::SplitFunction: return split_function(program, seed);
    case AttackKind::DuplicateVariable: return duplicate_variable(program, seed);
    case AttackKind::BogusField: return bogus_field(program, seed);
    case AttackKind::ReassignVariables: return reassign_variables(program);
  }
  return program;
}

AttackOutcome evaluate_attack(const Program& original, const Program& attacked, AttackKind kind,
                              std::int64_t watermark, std::span<const std::int64_t> trigger, const Inputs& inputs,
                              const lang::RunLimits& limits) {
  AttackOutcome o;
  o.kind = kind;
  o.transformed = !(original == attacked);
  bool original_ok = false;
  bool attacked_ok = false;
  const auto before = run_outputs(original, inputs, limits, original_ok);
  const auto after = run_outputs(attacked, inputs, limits, attacked_ok);
  o.runs_ok = attacked_ok && before == after;
  o.constants_intact = o.runs_ok;
  o.watermark_survives = watermark::extract(attacked, trigger, limits).value == watermark;
  o.verdict = o.runs_ok && o.watermark_survives ? Verdict::NotAffected : Verdict::Affected;
  return o;
}

std::pair<AttackOutcome, AttackOutcome> assess(const Program& wm, const Program& tp, std::int64_t watermark,
                                               std::span<const std::int64_t> trigger, const Inputs& inputs,
                                               AttackKind kind, std::uint64_t seed, const lang::RunLimits& limits) {
  return assess(
      wm, tp, watermark, trigger, inputs, [&](const Program& p) { return apply(kind, p, seed); }, kind, limits);
}

std::pair<AttackOutcome, AttackOutcome> assess(const Program& wm, const Program& tp, std::int64_t watermark,
                                               std::span<const std::int64_t> trigger, const Inputs& inputs,
                                               const Transform& transform, AttackKind kind,
                                               const lang::RunLimits& limits) {
  auto one = [&](const Program& p) {
    try {
      return evaluate_attack(p, transform(p), kind, watermark, trigger, inputs, limits);
    } catch (const Error&) {
      AttackOutcome failed;
      failed.kind = kind;
      failed.transformed = true;
      return failed;
    }
  };
  return {one(wm), one(tp)};
}

}  // namespace graphmark::attacks
