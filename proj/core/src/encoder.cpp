#include "graphmark/encoder.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"

namespace graphmark::encoder {
namespace {

using lang::Expr;
using lang::Stmt;

constexpr std::int64_t kMinInt = std::numeric_limits<std::int64_t>::min();

// The decoders. Leaves are recognized by their self-loop; ranks mirror
// ppct::rank with Catalan numbers computed in-language.
constexpr std::string_view kSupportSource = R"(
fn __tp_add(a, b) {
  return a + b;
}

fn __tp_mul(a, b) {
  return a * b;
}

fn __tp_cat(k) {
  c = 1;
  i = 0;
  while (i < k) {
    c = c * 2 * (2 * i + 1) / (i + 2);
    i = i + 1;
  }
  return c;
}

fn __tp_prefix(k) {
  s = 0;
  j = 1;
  while (j < k) {
    s = s + __tp_cat(j - 1);
    j = j + 1;
  }
  return s;
}

fn __tp_leaves(n) {
  l = n.left;
  if (l == n) {
    return 1;
  }
  return __tp_leaves(l) + __tp_leaves(n.right);
}

fn __tp_local(n) {
  l = n.left;
  if (l == n) {
    return 0;
  }
  r = n.right;
  a = __tp_leaves(l);
  b = __tp_leaves(r);
  k = a + b;
  s = 0;
  j = 1;
  while (j < a) {
    s = s + __tp_cat(j - 1) * __tp_cat(k - j - 1);
    j = j + 1;
  }
  return s + __tp_local(l) * __tp_cat(b - 1) + __tp_local(r);
}

fn __tp_rank(n) {
  return __tp_prefix(__tp_leaves(n)) + __tp_local(n);
}

fn __tp_nav(at, code) {
  m = 1;
  while (m <= code / 2) {
    m = m * 2;
  }
  m = m / 2;
  while (m > 0) {
    if (code / m % 2 == 0) {
      at = at.left;
    } else {
      at = at.right;
    }
    m = m / 2;
  }
  return at;
}

fn __tp_decode(code) {
  return __tp_rank(__tp_nav(__wm_anchor(), code));
}
)";

// Preorder literal slots among a statement's own expressions.
template <class ExprT>
void collect_literals(ExprT& e, std::vector<ExprT*>& out) {
  if (e.kind == Expr::Kind::IntLit) out.push_back(&e);
  for (auto& op : e.operands) collect_literals(op, out);
}

template <class StmtT, class ExprT = std::conditional_t<std::is_const_v<StmtT>, const Expr, Expr>>
std::vector<ExprT*> own_literals(StmtT& s) {
  std::vector<ExprT*> out;
  switch (s.kind) {
    case Stmt::Kind::Alloc:
    case Stmt::Kind::Snapshot: break;
    case Stmt::Kind::CallStmt:
      for (auto& a : s.args) collect_literals(a, out);
      break;
    default: collect_literals(s.expr, out);
  }
  return out;
}

template <class Body, class F>
void walk(Body& body, std::vector<std::size_t>& path, F& visit) {
  for (std::size_t i = 0; i < body.size(); ++i) {
    path.push_back(i);
    visit(body[i], path);
    path.push_back(0);
    walk(body[i].body, path, visit);
    path.back() = 1;
    walk(body[i].else_body, path, visit);
    path.pop_back();
    path.pop_back();
  }
}

Expr* locate(lang::Program& program, const SiteLocation& loc) {
  auto drift = [&](const std::string& why) -> SiteDriftError {
    return SiteDriftError("site " + loc.to_string() + ": " + why);
  };
  lang::Function* f = program.find(loc.function);
  if (!f) throw drift("no such function");
  if (loc.path.empty() || loc.path.size() % 2 == 0) throw drift("malformed statement path");
  std::vector<Stmt>* body = &f->body;
  Stmt* stmt = nullptr;
  for (std::size_t i = 0; i < loc.path.size(); i += 2) {
    if (i > 0) {
      const std::size_t sel = loc.path[i - 1];
      if (sel > 1) throw drift("malformed statement path");
      body = sel == 0 ? &stmt->body : &stmt->else_body;
    }
    if (loc.path[i] >= body->size()) throw drift("statement index out of range");
    stmt = &(*body)[loc.path[i]];
  }
  std::vector<Expr*> lits = own_literals(*stmt);
  if (loc.ordinal >= lits.size()) throw drift("literal ordinal out of range");
  return lits[loc.ordinal];
}

std::int64_t checked(std::int64_t v, bool overflowed) {
  if (overflowed) throw OverflowError("encoded expression overflows");
  return v;
}

class Splitter {
 public:
  Splitter(const EncodablePredicate& encodable, std::size_t max_depth, const SplitObserver& observer)
      : encodable_(encodable), max_depth_(max_depth), observer_(observer) {}

  EncodedExpr split(std::int64_t c, std::size_t depth) {
    SplitStep s{c, 1, 0};
    if (observer_) observer_(c, s);
    while (s.current > 1 && !encodable_(s.current)) {
      if (s.current % 2 == 0) {
        s.current /= 2;
        s.even *= 2;
      } else {
        s.current -= 1;
        s.odd += s.even;
      }
      if (observer_) observer_(c, s);
    }
    EncodedExpr e = EncodedExpr::add(
        EncodedExpr::mul(component(s.even, c, depth), component(s.current, c, depth)), component(s.odd, c, depth));
    if (e.lookup_count() == 0) return EncodedExpr::literal(c);
    return e;
  }

  bool capped = false;

 private:
  EncodedExpr component(std::int64_t x, std::int64_t parent, std::size_t depth) {
    if (encodable_(x)) return EncodedExpr::lookup(x);
    if (x <= 1 || x >= parent) return EncodedExpr::literal(x);
    if (depth >= max_depth_) {
      capped = true;
      return EncodedExpr::literal(x);
    }
    return split(x, depth + 1);
  }

  const EncodablePredicate& encodable_;
  std::size_t max_depth_;
  const SplitObserver& observer_;
};

void assign_paths(EncodedExpr& e, SubtreeIndex& index) {
  if (e.kind == EncodedExpr::Kind::Lookup) {
    const auto& path = index.find(e.value);
    if (!path) throw Error("lookup value " + std::to_string(e.value) + " is not in the watermark tree");
    e.path = *path;
  }
  for (EncodedExpr& op : e.operands) assign_paths(op, index);
}

Expr to_lang(const EncodedExpr& e) {
  switch (e.kind) {
    case EncodedExpr::Kind::Literal: return Expr::integer(e.value);
    case EncodedExpr::Kind::Lookup:
      return Expr::call(std::string(kDecodeName), {Expr::integer(e.path.pathcode())});
    case EncodedExpr::Kind::Add:
      return Expr::call(std::string(kAddName), {to_lang(e.operands[0]), to_lang(e.operands[1])});
    case EncodedExpr::Kind::Mul:
      return Expr::call(std::string(kMulName), {to_lang(e.operands[0]), to_lang(e.operands[1])});
  }
  throw Error("bad encoded expression");
}

nlohmann::json expr_json(const EncodedExpr& e) {
  switch (e.kind) {
    case EncodedExpr::Kind::Literal: return {{"op", "literal"}, {"value", e.value}};
    case EncodedExpr::Kind::Lookup:
      return {{"op", "lookup"}, {"path", e.path.to_string()}, {"pathcode", e.path.pathcode()}, {"expected", e.value}};
    case EncodedExpr::Kind::Add:
    case EncodedExpr::Kind::Mul:
      return {{"op", e.kind == EncodedExpr::Kind::Add ? "add" : "mul"},
              {"operands", {expr_json(e.operands[0]), expr_json(e.operands[1])}}};
  }
  return {};
}

void gather(const EncodedExpr& e, nlohmann::json& pathcodes, nlohmann::json& expected, nlohmann::json& residuals) {
  if (e.kind == EncodedExpr::Kind::Lookup) {
    pathcodes.push_back(e.path.pathcode());
    expected.push_back(e.value);
  } else if (e.kind == EncodedExpr::Kind::Literal) {
    residuals.push_back(e.value);
  }
  for (const EncodedExpr& op : e.operands) gather(op, pathcodes, expected, residuals);
}

}  // namespace

std::string SiteLocation::to_string() const {
  std::string out = function + ":";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out.push_back('.');
    out += std::to_string(path[i]);
  }
  return out + "#" + std::to_string(ordinal);
}

SelectionPolicy SelectionPolicy::parse(std::string_view text) {
  SelectionPolicy policy;
  if (text == "all") return policy;
  constexpr std::string_view kList = "list:";
  if (!text.starts_with(kList)) throw Error("unknown constant policy '" + std::string(text) + "'");
  policy.kind = Kind::List;
  std::string_view rest = text.substr(kList.size());
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || end != item.data() + item.size() || v == kMinInt)
      throw Error("bad value '" + std::string(item) + "' in constant policy");
    policy.values.push_back(v < 0 ? -v : v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
    if (rest.empty()) throw Error("trailing comma in constant policy");
  }
  if (policy.values.empty()) throw Error("empty constant list in policy");
  return policy;
}

std::vector<ConstantSite> select_constants(const lang::Program& program, const SelectionPolicy& policy) {
  std::vector<ConstantSite> sites;
  for (const lang::Function& f : program.functions) {
    if (lang::is_generated_name(f.name)) continue;
    std::vector<std::size_t> path;
    auto visit = [&](const Stmt& s, const std::vector<std::size_t>& at) {
      const std::vector<const Expr*> lits = own_literals(s);
      for (std::size_t i = 0; i < lits.size(); ++i) {
        const std::int64_t v = lits[i]->value;
        if (v == kMinInt) continue;
        const std::int64_t mag = v < 0 ? -v : v;
        bool take = false;
        if (policy.kind == SelectionPolicy::Kind::All) {
          take = policy.include_trivial || mag > 1;
        } else {
          for (std::int64_t want : policy.values) take = take || want == mag;
        }
        if (take) sites.push_back({{f.name, at, i}, v});
      }
    };
    walk(f.body, path, visit);
  }
  return sites;
}

EncodedExpr EncodedExpr::literal(std::int64_t v) { return EncodedExpr{Kind::Literal, v, {}, {}}; }

EncodedExpr EncodedExpr::lookup(std::int64_t expected, ppct::TreePath path) {
  return EncodedExpr{Kind::Lookup, expected, std::move(path), {}};
}

EncodedExpr EncodedExpr::add(EncodedExpr a, EncodedExpr b) {
  EncodedExpr e{Kind::Add, 0, {}, {}};
  e.operands.push_back(std::move(a));
  e.operands.push_back(std::move(b));
  return e;
}

EncodedExpr EncodedExpr::mul(EncodedExpr a, EncodedExpr b) {
  EncodedExpr e = add(std::move(a), std::move(b));
  e.kind = Kind::Mul;
  return e;
}

std::int64_t EncodedExpr::evaluate() const {
  return evaluate([](const EncodedExpr& e) { return e.value; });
}

std::int64_t EncodedExpr::evaluate(const std::function<std::int64_t(const EncodedExpr&)>& decode) const {
  std::int64_t r = 0;
  switch (kind) {
    case Kind::Literal: return value;
    case Kind::Lookup: return decode(*this);
    case Kind::Add:
      return checked(r, __builtin_add_overflow(operands[0].evaluate(decode), operands[1].evaluate(decode), &r));
    case Kind::Mul:
      return checked(r, __builtin_mul_overflow(operands[0].evaluate(decode), operands[1].evaluate(decode), &r));
  }
  return r;
}

std::size_t EncodedExpr::lookup_count() const {
  std::size_t n = kind == Kind::Lookup ? 1 : 0;
  for (const EncodedExpr& op : operands) n += op.lookup_count();
  return n;
}

SplitResult split_constant(std::int64_t c, const EncodablePredicate& encodable, std::size_t max_depth,
                           const SplitObserver& observer) {
  if (c < 0) throw Error("split_constant requires a non-negative value");
  if (encodable(c)) return {EncodedExpr::lookup(c), false};
  if (c <= 1) {
    if (observer) observer(c, SplitStep{c, 1, 0});
    return {EncodedExpr::literal(c), false};
  }
  Splitter splitter(encodable, max_depth, observer);
  EncodedExpr e = splitter.split(c, 0);
  return {std::move(e), splitter.capped};
}

SubtreeIndex::SubtreeIndex(ppct::PlaneTree watermark, std::size_t max_leaves)
    : tree_(std::move(watermark)), max_leaves_(max_leaves) {}

const std::optional<ppct::TreePath>& SubtreeIndex::find(std::int64_t value) {
  if (auto it = memo_.find(value); it != memo_.end()) return it->second;
  std::optional<ppct::TreePath> path;
  if (value >= 0) {
    const std::size_t leaves = ppct::leaves_for_rank(value);
    if (leaves <= tree_.leaf_count() && leaves <= max_leaves_) {
      path = ppct::find_substructure(tree_, ppct::unrank(value, max_leaves_));
      if (path && path->size() > ppct::kMaxPathcodeSteps) path.reset();
    }
  }
  return memo_.emplace(value, std::move(path)).first->second;
}

std::size_t EncodingPlan::protected_sites() const {
  std::size_t n = 0;
  for (const SiteEncoding& e : entries) n += e.unprotected ? 0 : 1;
  return n;
}

std::size_t EncodingPlan::lookup_count() const {
  std::size_t n = 0;
  for (const SiteEncoding& e : entries) n += e.unprotected ? 0 : e.expr.lookup_count();
  return n;
}

EncodingPlan plan_encoding(const lang::Program& /*program*/, const ppct::PlaneTree& watermark,
                           const std::vector<ConstantSite>& sites, const PlanOptions& options) {
  SubtreeIndex index(watermark, options.max_leaves);
  const EncodablePredicate encodable = [&](std::int64_t x) { return index.encodable(x); };
  EncodingPlan plan;
  for (const ConstantSite& site : sites) {
    if (site.value == kMinInt) throw Error("cannot encode " + std::to_string(site.value));
    SiteEncoding entry;
    entry.site = site;
    entry.negated = site.value < 0;
    const std::int64_t magnitude = entry.negated ? -site.value : site.value;
    SplitResult split = split_constant(magnitude, encodable, options.split_depth);
    entry.expr = std::move(split.expr);
    entry.depth_capped = split.depth_capped;
    entry.unprotected = entry.expr.lookup_count() == 0;
    assign_paths(entry.expr, index);
    plan.entries.push_back(std::move(entry));
  }
  return plan;
}

std::vector<lang::Function> gen_runtime_support() { return lang::parse_unchecked(kSupportSource).functions; }

std::size_t support_size() {
  static const std::size_t size = [] {
    std::size_t n = 0;
    for (const lang::Function& f : gen_runtime_support()) n += lang::serialize(f).size() + 1;
    return n;
  }();
  return size;
}

lang::Expr render(const SiteEncoding& entry) {
  if (entry.unprotected) return Expr::integer(entry.site.value);
  Expr e = to_lang(entry.expr);
  return entry.negated ? Expr::neg(std::move(e)) : e;
}

std::int64_t site_delta(const SiteEncoding& entry) {
  const auto rendered = static_cast<std::int64_t>(lang::serialize(render(entry)).size());
  const auto original = static_cast<std::int64_t>(lang::serialize(Expr::integer(entry.site.value)).size());
  return rendered - original;
}

lang::Program rewrite(const lang::Program& program, const EncodingPlan& plan) {
  lang::Program out = program;
  std::vector<std::pair<Expr*, const SiteEncoding*>> targets;
  for (const SiteEncoding& entry : plan.entries) {
    Expr* lit = locate(out, entry.site.location);
    if (lit->value != entry.site.value)
      throw SiteDriftError("site " + entry.site.location.to_string() + ": expected literal " +
                           std::to_string(entry.site.value) + ", found " + std::to_string(lit->value));
    if (!entry.unprotected) targets.emplace_back(lit, &entry);
  }
  if (targets.empty()) return out;

  if (!out.find(watermark::kAnchorAccessor))
    throw Error("program has no '" + std::string(watermark::kAnchorAccessor) + "' accessor; embed a watermark first");
  std::vector<lang::Function> support = gen_runtime_support();
  for (const lang::Function& f : support)
    if (out.find(f.name) || out.has_global(f.name))
      throw ReservedNameError("program already defines '" + f.name + "'");

  for (auto& [lit, entry] : targets) *lit = render(*entry);
  for (lang::Function& f : support) out.functions.push_back(std::move(f));
  lang::validate(out);
  return out;
}

std::string plan_to_json(const EncodingPlan& plan) {
  nlohmann::json sites = nlohmann::json::array();
  for (const SiteEncoding& e : plan.entries) {
    nlohmann::json pathcodes = nlohmann::json::array();
    nlohmann::json expected = nlohmann::json::array();
    nlohmann::json residuals = nlohmann::json::array();
    gather(e.expr, pathcodes, expected, residuals);
    sites.push_back({
        {"location", e.site.location.to_string()},
        {"function", e.site.location.function},
        {"statement_path", e.site.location.path},
        {"ordinal", e.site.location.ordinal},
        {"value", e.site.value},
        {"negated", e.negated},
        {"expression", expr_json(e.expr)},
        {"pathcodes", pathcodes},
        {"expected", expected},
        {"residuals", residuals},
        {"unprotected", e.unprotected},
        {"depth_capped", e.depth_capped},
        {"delta_bytes", site_delta(e)},
    });
  }
  nlohmann::json doc = {
      {"sites", sites},
      {"protected_sites", plan.protected_sites()},
      {"lookups", plan.lookup_count()},
      {"support_bytes", support_size()},
  };
  return doc.dump(2) + "\n";
}

Protection protect(const lang::Program& watermarked, std::span<const std::int64_t> trigger,
                   const SelectionPolicy& policy, const PlanOptions& options, const lang::RunLimits& limits) {
  const watermark::Extraction found = watermark::extract(watermarked, trigger, limits);
  if (!found.value) {
    std::string why = "no watermark found on the trigger input";
    if (found.status != lang::RunStatus::Ok)
      why += " (" + std::string(lang::to_string(found.status)) + ": " + found.detail + ")";
    throw Error(why);
  }
  ppct::PlaneTree tree = ppct::unrank(*found.value, options.max_leaves);
  EncodingPlan plan = plan_encoding(watermarked, tree, select_constants(watermarked, policy), options);
  lang::Program out = rewrite(watermarked, plan);
  return {std::move(out), std::move(plan), std::move(tree)};
}

}  // namespace graphmark::encoder
