#include "graphmark/bench.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <sstream>

#include <nlohmann/json.hpp>

#include "graphmark/error.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"

namespace graphmark::bench {
namespace {

using nlohmann::json;

std::string join_args(const std::vector<std::int64_t>& args, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(args[i]);
  }
  return out;
}

ProgramReport run_pipeline(const CorpusProgram& entry, const BenchConfig& config) {
  ProgramReport r;
  r.name = entry.name;
  try {
    watermark::WatermarkSpec spec;
    spec.value = config.watermark;
    spec.trigger = config.trigger;
    spec.max_leaves = config.plan.max_leaves;
    const lang::Program wm = watermark::embed(entry.program, spec);
    const encoder::Protection tp = encoder::protect(wm, config.trigger, encoder::SelectionPolicy::parse(config.policy),
                                                    config.plan, config.limits);
    r.wm = measure(wm, entry.inputs, config.limits);
    r.tp = measure(tp.program, entry.inputs, config.limits);
    r.sites = tp.plan.entries.size();
    r.protected_sites = tp.plan.protected_sites();
    r.lookups = tp.plan.lookup_count();
    for (const encoder::SiteEncoding& e : tp.plan.entries)
      if (!e.unprotected) r.site_bytes += encoder::site_delta(e);
    const std::int64_t support = r.protected_sites > 0 ? static_cast<std::int64_t>(encoder::support_size()) : 0;
    r.law_holds = static_cast<std::int64_t>(r.tp.code_size_bytes) - static_cast<std::int64_t>(r.wm.code_size_bytes) ==
                  support + r.site_bytes;
    for (attacks::AttackKind kind : attacks::kAllAttacks) {
      auto [w, t] = attacks::assess(wm, tp.program, config.watermark, config.trigger, entry.inputs, kind,
                                    config.seed, config.limits);
      r.attacks.push_back({w, t});
    }
  } catch (const std::exception& e) {
    ProgramReport failed;
    failed.name = entry.name;
    failed.error = e.what();
    return failed;
  }
  return r;
}

json metrics_json(const Metrics& m) {
  return {{"code_size_bytes", m.code_size_bytes},
          {"steps", m.steps},
          {"peak_live_nodes", m.peak_live_nodes},
          {"total_allocations", m.total_allocations}};
}

Metrics metrics_from(const json& j) {
  return {j.at("code_size_bytes").get<std::uint64_t>(), j.at("steps").get<std::uint64_t>(),
          j.at("peak_live_nodes").get<std::uint64_t>(), j.at("total_allocations").get<std::uint64_t>()};
}

std::int64_t diff(std::uint64_t tp, std::uint64_t wm) {
  return static_cast<std::int64_t>(tp) - static_cast<std::int64_t>(wm);
}

json delta_json(const Metrics& wm, const Metrics& tp) {
  return {{"code_size_bytes", diff(tp.code_size_bytes, wm.code_size_bytes)},
          {"steps", diff(tp.steps, wm.steps)},
          {"peak_live_nodes", diff(tp.peak_live_nodes, wm.peak_live_nodes)},
          {"total_allocations", diff(tp.total_allocations, wm.total_allocations)}};
}

json outcome_json(const attacks::AttackOutcome& o) {
  return {{"transformed", o.transformed},
          {"runs_ok", o.runs_ok},
          {"watermark_survives", o.watermark_survives},
          {"constants_intact", o.constants_intact},
          {"verdict", attacks::to_string(o.verdict)}};
}

attacks::AttackOutcome outcome_from(const json& j, attacks::AttackKind kind) {
  attacks::AttackOutcome o;
  o.kind = kind;
  o.transformed = j.at("transformed").get<bool>();
  o.runs_ok = j.at("runs_ok").get<bool>();
  o.watermark_survives = j.at("watermark_survives").get<bool>();
  o.constants_intact = j.at("constants_intact").get<bool>();
  const std::string verdict = j.at("verdict").get<std::string>();
  if (verdict == attacks::to_string(attacks::Verdict::NotAffected))
    o.verdict = attacks::Verdict::NotAffected;
  else if (verdict == attacks::to_string(attacks::Verdict::Affected))
    o.verdict = attacks::Verdict::Affected;
  else
    throw Error("unknown verdict '" + verdict + "'");
  return o;
}

std::string signed_str(std::int64_t v) { return (v > 0 ? "+" : "") + std::to_string(v); }

void row(std::ostringstream& out, const std::vector<std::string>& cells) {
  out << "|";
  for (const std::string& c : cells) out << " " << c << " |";
  out << "\n";
}

void header(std::ostringstream& out, const std::vector<std::string>& names) {
  row(out, names);
  out << "|---";
  for (std::size_t i = 1; i < names.size(); ++i) out << "|---:";
  out << "|\n";
}

}  // namespace

Metrics measure(const lang::Program& program, const Inputs& inputs, const lang::RunLimits& limits) {
  if (inputs.empty()) throw Error("measure needs at least one input vector");
  Metrics m;
  m.code_size_bytes = lang::code_size(program);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const lang::RunResult r = lang::interpret(program, inputs[i], limits);
    if (!r.ok())
      throw Error("input #" + std::to_string(i) + " (" + join_args(inputs[i], ", ") +
                  ") failed: " + std::string(lang::to_string(r.status)) + ": " + r.error_detail);
    m.steps += r.steps;
    m.peak_live_nodes += r.peak_live_nodes;
    m.total_allocations += r.total_allocations;
  }
  return m;
}

ResilienceReport compare(const std::vector<CorpusProgram>& corpus, const BenchConfig& config) {
  ResilienceReport report;
  report.watermark = config.watermark;
  report.trigger = config.trigger;
  report.policy = config.policy;
  report.seed = config.seed;
  report.support_bytes = encoder::support_size();

  std::vector<std::future<ProgramReport>> jobs;
  for (const CorpusProgram& entry : corpus)
    jobs.push_back(std::async(std::launch::async, [&entry, &config] { return run_pipeline(entry, config); }));
  for (auto& job : jobs) {
    report.programs.push_back(job.get());
    const ProgramReport& r = report.programs.back();
    report.law_holds = report.law_holds && !r.error && r.law_holds;
  }
  return report;
}

std::string render_json(const ResilienceReport& report) {
  json programs = json::array();
  for (const ProgramReport& r : report.programs) {
    json p = {{"name", r.name}};
    if (r.error) {
      p["error"] = *r.error;
      programs.push_back(std::move(p));
      continue;
    }
    p["error"] = nullptr;
    p["wm"] = metrics_json(r.wm);
    p["tp"] = metrics_json(r.tp);
    p["delta"] = delta_json(r.wm, r.tp);
    p["sites"] = r.sites;
    p["protected_sites"] = r.protected_sites;
    p["lookups"] = r.lookups;
    p["site_bytes"] = r.site_bytes;
    p["law_holds"] = r.law_holds;
    json cells = json::object();
    for (std::size_t i = 0; i < r.attacks.size(); ++i)
      cells[std::string(attacks::to_string(attacks::kAllAttacks[i]))] = {{"wm", outcome_json(r.attacks[i].wm)},
                                                                        {"tp", outcome_json(r.attacks[i].tp)}};
    p["attacks"] = std::move(cells);
    programs.push_back(std::move(p));
  }
  const json doc = {
      {"config",
       {{"watermark", report.watermark}, {"trigger", report.trigger}, {"policy", report.policy}, {"seed", report.seed}}},
      {"support_bytes", report.support_bytes},
      {"law_holds", report.law_holds},
      {"programs", std::move(programs)},
  };
  return doc.dump(2) + "\n";
}

ResilienceReport parse_report_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    ResilienceReport report;
    const json& config = doc.at("config");
    report.watermark = config.at("watermark").get<std::int64_t>();
    report.trigger = config.at("trigger").get<std::vector<std::int64_t>>();
    report.policy = config.at("policy").get<std::string>();
    report.seed = config.at("seed").get<std::uint64_t>();
    report.support_bytes = doc.at("support_bytes").get<std::uint64_t>();
    report.law_holds = doc.at("law_holds").get<bool>();
    for (const json& p : doc.at("programs")) {
      ProgramReport r;
      r.name = p.at("name").get<std::string>();
      if (!p.at("error").is_null()) {
        r.error = p.at("error").get<std::string>();
        report.programs.push_back(std::move(r));
        continue;
      }
      r.wm = metrics_from(p.at("wm"));
      r.tp = metrics_from(p.at("tp"));
      r.sites = p.at("sites").get<std::size_t>();
      r.protected_sites = p.at("protected_sites").get<std::size_t>();
      r.lookups = p.at("lookups").get<std::size_t>();
      r.site_bytes = p.at("site_bytes").get<std::int64_t>();
      r.law_holds = p.at("law_holds").get<bool>();
      const json& cells = p.at("attacks");
      for (attacks::AttackKind kind : attacks::kAllAttacks) {
        const json& cell = cells.at(std::string(attacks::to_string(kind)));
        r.attacks.push_back({outcome_from(cell.at("wm"), kind), outcome_from(cell.at("tp"), kind)});
      }
      report.programs.push_back(std::move(r));
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

std::string render_markdown(const ResilienceReport& report) {
  std::ostringstream out;
  out << "# Resilience report\n\n";
  out << "Watermark " << report.watermark << ", trigger (" << join_args(report.trigger, ", ") << "), policy `"
      << report.policy << "`, seed " << report.seed << ".\n\n";
  out << "Decoder support code: " << report.support_bytes << " bytes. Code-size decomposition "
      << (report.law_holds ? "holds" : "does not hold") << " for every program.\n";

  auto failed = [&](const ProgramReport& r, std::size_t columns) {
    std::vector<std::string> cells{r.name, "error: " + *r.error};
    while (cells.size() < columns) cells.emplace_back("");
    row(out, cells);
  };

  out << "\n## Heap space\n\n";
  out << "Peak live nodes and allocations, summed over the input vectors.\n\n";
  header(out, {"Program", "WM peak", "TP peak", "Difference", "WM allocations", "TP allocations"});
  for (const ProgramReport& r : report.programs) {
    if (r.error) {
      failed(r, 6);
      continue;
    }
    row(out, {r.name, std::to_string(r.wm.peak_live_nodes), std::to_string(r.tp.peak_live_nodes),
              signed_str(diff(r.tp.peak_live_nodes, r.wm.peak_live_nodes)), std::to_string(r.wm.total_allocations),
              std::to_string(r.tp.total_allocations)});
  }

  out << "\n## Execution steps\n\n";
  header(out, {"Program", "WM", "TP", "Difference"});
  for (const ProgramReport& r : report.programs) {
    if (r.error) {
      failed(r, 4);
      continue;
    }
    row(out, {r.name, std::to_string(r.wm.steps), std::to_string(r.tp.steps), signed_str(diff(r.tp.steps, r.wm.steps))});
  }

  out << "\n## Code size\n\n";
  out << "Bytes of canonical source. Difference = support code + per-site replacement bytes.\n\n";
  header(out, {"Program", "WM", "TP", "Difference", "Sites", "Protected", "Lookups", "Site bytes"});
  for (const ProgramReport& r : report.programs) {
    if (r.error) {
      failed(r, 8);
      continue;
    }
    row(out, {r.name, std::to_string(r.wm.code_size_bytes), std::to_string(r.tp.code_size_bytes),
              signed_str(diff(r.tp.code_size_bytes, r.wm.code_size_bytes)), std::to_string(r.sites),
              std::to_string(r.protected_sites), std::to_string(r.lookups), signed_str(r.site_bytes)});
  }

  for (std::size_t i = 0; i < attacks::kAllAttacks.size(); ++i) {
    const attacks::AttackKind kind = attacks::kAllAttacks[i];
    out << "\n## Attack: " << attacks::to_string(kind) << (attacks::is_adapted(kind) ? " (adapted)" : "") << "\n\n";
    if (kind == attacks::AttackKind::Reorder) out << "Heap-touching statements keep their relative order.\n\n";
    out << "| Program | WM | TP |\n|---|---|---|\n";
    for (const ProgramReport& r : report.programs) {
      if (r.error) {
        failed(r, 3);
        continue;
      }
      row(out, {r.name, std::string(attacks::to_string(r.attacks[i].wm.verdict)),
                std::string(attacks::to_string(r.attacks[i].tp.verdict))});
    }
  }
  return out.str();
}

std::map<std::string, Inputs> parse_inputs_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) throw Error("inputs file must be a JSON object");
    for (const auto& [name, vectors] : doc.items())
      for (const auto& args : vectors)
        for (const auto& v : args)
          if (!v.is_number_integer()) throw Error("non-integer argument for '" + name + "': " + v.dump());
    return doc.get<std::map<std::string, Inputs>>();
  } catch (const json::exception& e) {
    throw Error(std::string("malformed inputs file: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<CorpusProgram> load_corpus(const std::filesystem::path& dir, const std::filesystem::path& inputs_json) {
  if (!std::filesystem::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  const std::map<std::string, Inputs> inputs = parse_inputs_json(read_file(inputs_json));
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".gm") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CorpusProgram> corpus;
  for (const auto& file : files) {
    const std::string name = file.stem().string();
    auto it = inputs.find(name);
    if (it == inputs.end()) throw Error("no inputs listed for '" + name + "'");
    try {
      corpus.push_back({name, lang::parse(read_file(file)), it->second});
    } catch (const Error& e) {
      throw Error(file.string() + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace graphmark::bench
