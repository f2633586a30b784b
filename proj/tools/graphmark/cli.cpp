#include "graphmark/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#ifdef GRAPHMARK_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "graphmark/attacks.hpp"
#include "graphmark/bench.hpp"
#include "graphmark/encoder.hpp"
#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"

namespace graphmark::cli {
namespace {

using nlohmann::json;


std::vector<std::int64_t> parse_ints(const std::string& text, const char* what) {
  std::vector<std::int64_t> out;
  if (text.empty()) return out;
  std::string_view rest = text;
  for (;;) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || end != item.data() + item.size() || item.empty())
      throw CLI::ValidationError(what, "expected comma-separated integers, got '" + text + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) return out;
    rest = rest.substr(comma + 1);
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("cannot write " + path);
}

lang::Program load_program(const std::string& path) {
  try {
    return lang::parse(bench::read_file(path));
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

// Writes the program to --out (and a summary line to stdout), or the program
// text itself to stdout.
void emit_program(const lang::Program& program, const std::string& out_path, json summary, std::ostream& out) {
  const std::string text = lang::serialize(program);
  if (out_path.empty()) {
    out << text;
    return;
  }
  write_file(out_path, text);
  summary["out"] = out_path;
  summary["code_size_bytes"] = text.size();
  out << summary.dump() << "\n";
}

// `--config FILE` supplies key=value defaults; flags on the command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config requires a file");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!config) return args;

  std::ifstream in(*config);
  if (!in) throw CLI::FileError::Missing(*config);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ConversionError(*config + ":" + std::to_string(lineno) + ": expected key=value");
    const std::string flag = "--" + trim(line.substr(0, eq));
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.starts_with(flag + "=");
    });
    if (!given) args.push_back(flag + "=" + trim(line.substr(eq + 1)));
  }
  return args;
}

struct Limits {
  std::uint64_t max_steps = lang::RunLimits{}.max_steps;
  std::uint64_t max_heap = lang::RunLimits{}.max_allocations;

  void add_to(CLI::App& app) {
    app.add_option("--max-steps", max_steps, "Interpreter step cap")->check(CLI::PositiveNumber);
    app.add_option("--max-heap", max_heap, "Interpreter allocation cap")->check(CLI::PositiveNumber);
  }

  lang::RunLimits get() const {
    lang::RunLimits l;
    l.max_steps = max_steps;
    l.max_allocations = max_heap;
    return l;
  }
};

struct Options {
  std::string in;
  std::string out;
  std::string args;
  std::string trigger;
  std::string policy = "all";
  std::string plan;
  std::string kind;
  std::string anchor = std::string(watermark::kDefaultAnchor);
  std::string corpus;
  std::string inputs;
  std::string markdown;
  std::string format = "md";
  std::int64_t watermark = 0;
  std::uint64_t seed = 0;
  std::size_t max_leaves = ppct::kDefaultMaxLeaves;
  std::size_t split_depth = encoder::kDefaultSplitDepth;
  bool include_trivial = false;
  Limits limits;
};

int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const lang::Program program = load_program(o.in);
  const std::vector<std::int64_t> args = parse_ints(o.args, "--args");
  const lang::RunResult r = lang::interpret(program, args, o.limits.get());
  for (const std::string& line : r.output) out << line << "\n";
  if (!r.ok()) {
    err << "error: " << lang::to_string(r.status) << ": " << r.error_detail << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_embed(const Options& o, std::ostream& out) {
  watermark::WatermarkSpec spec;
  spec.value = o.watermark;
  spec.trigger = parse_ints(o.trigger, "--trigger");
  spec.anchor = o.anchor;
  spec.max_leaves = o.max_leaves;
  const lang::Program wm = watermark::embed(load_program(o.in), spec);
  emit_program(wm, o.out, {{"command", "embed"}, {"watermark", o.watermark}}, out);
  return kExitOk;
}

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<std::int64_t> trigger = parse_ints(o.trigger, "--trigger");
  const watermark::Extraction found = watermark::extract(load_program(o.in), trigger, o.limits.get());
  if (found.value) {
    out << *found.value << "\n";
    return kExitOk;
  }
  out << "NOT-FOUND\n";
  if (found.status != lang::RunStatus::Ok)
    err << "error: " << lang::to_string(found.status) << ": " << found.detail << "\n";
  return kExitFailure;
}

int cmd_protect(const Options& o, std::ostream& out, std::ostream& err) {
  encoder::SelectionPolicy policy = encoder::SelectionPolicy::parse(o.policy);
  policy.include_trivial = o.include_trivial;
  encoder::PlanOptions plan_options;
  plan_options.max_leaves = o.max_leaves;
  plan_options.split_depth = o.split_depth;
  const std::vector<std::int64_t> trigger = parse_ints(o.trigger, "--trigger");
  const encoder::Protection p =
      encoder::protect(load_program(o.in), trigger, policy, plan_options, o.limits.get());
  if (!o.plan.empty()) write_file(o.plan, encoder::plan_to_json(p.plan));
  emit_program(p.program, o.out,
               {{"command", "protect"},
                {"sites", p.plan.entries.size()},
                {"protected_sites", p.plan.protected_sites()},
                {"lookups", p.plan.lookup_count()}},
               out);
  if (p.plan.protected_sites() == 0) {
    err << "error: no constant site could be protected\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_attack(const Options& o, std::ostream& out) {
  const std::optional<attacks::AttackKind> kind = attacks::parse_attack(o.kind);
  const lang::Program before = load_program(o.in);
  const lang::Program after = attacks::apply(*kind, before, o.seed);
  emit_program(after, o.out,
               {{"command", "attack"}, {"kind", o.kind}, {"seed", o.seed}, {"transformed", !(before == after)}}, out);
  return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  bench::BenchConfig config;
  config.watermark = o.watermark;
  config.trigger = parse_ints(o.trigger, "--trigger");
  config.policy = o.policy;
  config.seed = o.seed;
  config.limits = o.limits.get();
  config.plan.max_leaves = o.max_leaves;
  config.plan.split_depth = o.split_depth;
  encoder::SelectionPolicy::parse(o.policy);

  const bench::ResilienceReport report = bench::compare(bench::load_corpus(o.corpus, o.inputs), config);
  const std::string text = bench::render_json(report);
  if (o.out.empty()) {
    out << text;
  } else {
    write_file(o.out, text);
    out << json{{"command", "bench"}, {"out", o.out}, {"programs", report.programs.size()},
                {"law_holds", report.law_holds}}
                .dump()
        << "\n";
  }
  if (!o.markdown.empty()) write_file(o.markdown, bench::render_markdown(report));
  int code = kExitOk;
  for (const bench::ProgramReport& r : report.programs) {
    if (r.error) {
      err << "error: " << r.name << ": " << *r.error << "\n";
      code = kExitFailure;
    }
  }
  return code;
}

int cmd_report(const Options& o, std::ostream& out) {
  const bench::ResilienceReport report = bench::parse_report_json(bench::read_file(o.in));
  const std::string text = o.format == "json" ? bench::render_json(report) : bench::render_markdown(report);
  if (o.out.empty())
    out << text;
  else
    write_file(o.out, text);
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Dynamic graph watermarking with tamper-proofed constants", "graphmark"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  auto ints = [](const char* flag) {
    return CLI::Validator(
        [flag](std::string& s) {
          try {
            parse_ints(s, flag);
          } catch (const CLI::Error& e) {
            return std::string(e.what());
          }
          return std::string();
        },
        "INT[,INT...]");
  };
  auto add_in = [&](CLI::App* c) { c->add_option("--in", o.in, "Input .gm program")->required(); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", o.out, "Output path (default: stdout)"); };
  auto add_trigger = [&](CLI::App* c) {
    c->add_option("--trigger", o.trigger, "Secret input to main, e.g. 9,9")->required()->check(ints("--trigger"));
  };
  auto add_watermark = [&](CLI::App* c) {
    c->add_option("--watermark", o.watermark, "Watermark value")->required()->check(CLI::NonNegativeNumber);
  };
  auto add_tree_opts = [&](CLI::App* c) {
    c->add_option("--max-leaves", o.max_leaves, "Largest tree the codec will build")->check(CLI::PositiveNumber);
  };
  auto add_encoding = [&](CLI::App* c) {
    c->add_option("--policy", o.policy, "Constant selection: all | list:V1,V2,...");
    c->add_option("--split-depth", o.split_depth, "Recursion cap for constant splitting")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "Interpret a program");
  add_in(run);
  run->add_option("--args", o.args, "Arguments to main, e.g. 3,4")->check(ints("--args"));
  o.limits.add_to(*run);

  CLI::App* embed = app.add_subcommand("embed", "Embed a numeric watermark");
  add_in(embed);
  add_watermark(embed);
  add_trigger(embed);
  embed->add_option("--anchor", o.anchor, "Global that holds the tree root");
  add_tree_opts(embed);
  add_out(embed);

  CLI::App* extract = app.add_subcommand("extract", "Recover the watermark by running on the trigger");
  add_in(extract);
  add_trigger(extract);
  o.limits.add_to(*extract);

  CLI::App* protect = app.add_subcommand("protect", "Encode constants against the embedded watermark");
  add_in(protect);
  add_trigger(protect);
  add_encoding(protect);
  protect->add_flag("--include-trivial", o.include_trivial, "Also encode 0, 1 and -1 under policy all");
  add_tree_opts(protect);
  protect->add_option("--plan", o.plan, "Write the encoding plan as JSON");
  o.limits.add_to(*protect);
  add_out(protect);

  CLI::App* attack = app.add_subcommand("attack", "Apply a semantics-preserving transformation");
  add_in(attack);
  std::vector<std::string> kinds;
  for (attacks::AttackKind k : attacks::kAllAttacks) kinds.emplace_back(attacks::to_string(k));
  attack->add_option("--kind", o.kind, "Attack kind")->required()->check(CLI::IsMember(kinds));
  attack->add_option("--seed", o.seed, "Random seed");
  add_out(attack);

  CLI::App* benchmark = app.add_subcommand("bench", "Measure and attack WM and TP builds of a corpus");
  benchmark->add_option("--corpus", o.corpus, "Directory of .gm programs")->required()->check(CLI::ExistingDirectory);
  benchmark->add_option("--inputs", o.inputs, "JSON map of program name to argument vectors")
      ->required()
      ->check(CLI::ExistingFile);
  add_watermark(benchmark);
  add_trigger(benchmark);
  add_encoding(benchmark);
  add_tree_opts(benchmark);
  benchmark->add_option("--seed", o.seed, "Attack seed");
  benchmark->add_option("--markdown", o.markdown, "Also write the markdown report here");
  o.limits.add_to(*benchmark);
  add_out(benchmark);

  CLI::App* report = app.add_subcommand("report", "Render a saved bench report");
  report->add_option("--in", o.in, "report.json from bench")->required()->check(CLI::ExistingFile);
  report->add_option("--format", o.format, "md or json")->check(CLI::IsMember({"md", "json"}));
  add_out(report);

  try {
    std::vector<std::string> args = expand_config(std::vector<std::string>(argv.begin() + (argv.empty() ? 0 : 1), argv.end()));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o, out, err);
    if (embed->parsed()) return cmd_embed(o, out);
    if (extract->parsed()) return cmd_extract(o, out, err);
    if (protect->parsed()) return cmd_protect(o, out, err);
    if (attack->parsed()) return cmd_attack(o, out);
    if (benchmark->parsed()) return cmd_bench(o, out, err);
    if (report->parsed()) return cmd_report(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace graphmark::cli
