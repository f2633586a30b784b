#include "graphmark/watermark.hpp"

#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"

namespace graphmark::watermark {
namespace {

using lang::Expr;
using lang::Field;
using lang::Stmt;

std::string node_var(std::size_t i) { return "n" + std::to_string(i); }

void check_spec(const WatermarkSpec& spec) {
  if (spec.value < 0) throw Error("watermark value must be non-negative");
  if (spec.trigger.empty()) throw Error("watermark trigger must not be empty");
  if (spec.anchor.empty()) throw Error("watermark anchor name must not be empty");
}

}  // namespace

lang::Function synthesize_builder(const WatermarkSpec& spec) {
  check_spec(spec);
  const ppct::PlaneTree tree = ppct::unrank(spec.value, spec.max_leaves);
  lang::Function f;
  f.name = std::string(kBuilderName);
  const std::size_t n = tree.node_count();
  for (std::size_t i = 0; i < n; ++i) f.body.push_back(Stmt::alloc(node_var(i)));
  for (ppct::PlaneTree::NodeId i = 0; i < n; ++i) {
    if (tree.is_leaf(i)) continue;
    f.body.push_back(Stmt::field_store(node_var(i), Field::Left, Expr::var(node_var(tree.left(i)))));
    f.body.push_back(Stmt::field_store(node_var(i), Field::Right, Expr::var(node_var(tree.right(i)))));
  }
  std::vector<ppct::PlaneTree::NodeId> leaves;
  for (ppct::PlaneTree::NodeId i = 0; i < n; ++i)
    if (tree.is_leaf(i)) leaves.push_back(i);
  for (std::size_t j = 0; j < leaves.size(); ++j) {
    const std::string self = node_var(leaves[j]);
    f.body.push_back(Stmt::field_store(self, Field::Left, Expr::var(self)));
    f.body.push_back(
        Stmt::field_store(self, Field::Right, Expr::var(node_var(leaves[(j + 1) % leaves.size()]))));
  }
  f.body.push_back(Stmt::assign(spec.anchor, Expr::var(node_var(0))));
  return f;
}

lang::Function anchor_accessor(const WatermarkSpec& spec) {
  lang::Function f;
  f.name = std::string(kAnchorAccessor);
  f.body.push_back(Stmt::ret(Expr::var(spec.anchor)));
  return f;
}

lang::Program embed(const lang::Program& program, const WatermarkSpec& spec) {
  check_spec(spec);
  lang::validate(program);
  for (const std::string& g : program.globals)
    if (lang::is_generated_name(g) || g == spec.anchor)
      throw ReservedNameError("global '" + g + "' collides with the reserved watermark namespace");
  for (const lang::Function& f : program.functions)
    if (lang::is_generated_name(f.name) || f.name == spec.anchor)
      throw ReservedNameError("function '" + f.name + "' collides with the reserved watermark namespace");

  const lang::Function* main = program.find("main");
  if (main->params.size() != spec.trigger.size())
    throw Error("trigger has " + std::to_string(spec.trigger.size()) + " value(s) but main takes " +
                std::to_string(main->params.size()));

  lang::Program out = program;
  out.globals.push_back(spec.anchor);

  lang::Function& entry = *out.find("main");
  Expr guard;
  for (std::size_t i = 0; i < entry.params.size(); ++i) {
    Expr test = Expr::binary(lang::BinaryOp::Eq, Expr::var(entry.params[i]), Expr::integer(spec.trigger[i]));
    guard = i == 0 ? std::move(test) : Expr::binary(lang::BinaryOp::And, std::move(guard), std::move(test));
  }
  std::vector<Stmt> prologue;
  prologue.push_back(Stmt::call(std::string(kBuilderName), {}));
  prologue.push_back(Stmt::if_else(std::move(guard), {Stmt::snapshot()}));
  entry.body.insert(entry.body.begin(), prologue.begin(), prologue.end());

  out.functions.push_back(synthesize_builder(spec));
  out.functions.push_back(anchor_accessor(spec));
  lang::validate(out);
  return out;
}

Extraction extract(const lang::Program& program, std::span<const std::int64_t> trigger,
                   const lang::RunLimits& limits) {
  const lang::RunResult run = lang::interpret(program, trigger, limits);
  Extraction out;
  out.status = run.status;
  out.detail = run.error_detail;
  if (!run.ok() || !run.snapshot) return out;
  for (const auto& [name, root] : run.snapshot->anchors) {
    const std::optional<ppct::HeapPpct> found = ppct::recognize_heap_ppct(*run.snapshot, root);
    if (!found) continue;
    try {
      out.value = ppct::rank(found->shape);
      return out;
    } catch (const OverflowError&) {
      continue;
    }
  }
  return out;
}

std::optional<ppct::PlaneTree> embedded_tree(const lang::Program& program, std::span<const std::int64_t> trigger,
                                             const lang::RunLimits& limits, std::size_t max_leaves) {
  const Extraction found = extract(program, trigger, limits);
  if (!found.value) return std::nullopt;
  return ppct::unrank(*found.value, max_leaves);
}

}  // namespace graphmark::watermark
