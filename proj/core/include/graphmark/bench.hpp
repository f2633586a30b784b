#pragma once

// Cost and resilience measurement of watermarked (WM) versus tamper-proofed
// (TP) builds over a corpus, with JSON and markdown reports.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphmark/ast.hpp"
#include "graphmark/attacks.hpp"
#include "graphmark/encoder.hpp"
#include "graphmark/interpreter.hpp"

namespace graphmark::bench {

using Inputs = attacks::Inputs;

struct Metrics {
  std::uint64_t code_size_bytes = 0;
  /// Summed over the input vectors, like the two fields below.
  std::uint64_t steps = 0;
  std::uint64_t peak_live_nodes = 0;
  std::uint64_t total_allocations = 0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Throws Error naming the first input that fails, or if `inputs` is empty.
Metrics measure(const lang::Program& program, const Inputs& inputs, const lang::RunLimits& limits = {});

struct CorpusProgram {
  std::string name;
  lang::Program program;
  Inputs inputs;
};

struct BenchConfig {
  std::int64_t watermark = 0;
  std::vector<std::int64_t> trigger;
  std::string policy = "all";
  std::uint64_t seed = 0;
  lang::RunLimits limits;
  encoder::PlanOptions plan;
};

struct AttackCell {
  attacks::AttackOutcome wm;
  attacks::AttackOutcome tp;

  friend bool operator==(const AttackCell&, const AttackCell&) = default;
};

struct ProgramReport {
  std::string name;
  /// Set when the pipeline failed for this program; the rest is then empty.
  std::optional<std::string> error;
  Metrics wm;
  Metrics tp;
  std::size_t sites = 0;
  std::size_t protected_sites = 0;
  std::size_t lookups = 0;
  /// Sum of per-site replacement size deltas.
  std::int64_t site_bytes = 0;
  /// TP size - WM size == support bytes (if any site is protected) + site_bytes.
  bool law_holds = false;
  /// One cell per attack, in kAllAttacks order.
  std::vector<AttackCell> attacks;

  friend bool operator==(const ProgramReport&, const ProgramReport&) = default;
};

struct ResilienceReport {
  std::int64_t watermark = 0;
  std::vector<std::int64_t> trigger;
  std::string policy;
  std::uint64_t seed = 0;
  std::uint64_t support_bytes = 0;
  bool law_holds = true;
  std::vector<ProgramReport> programs;

  friend bool operator==(const ResilienceReport&, const ResilienceReport&) = default;
};

/// Embeds, protects, measures and attacks every program (concurrently).
ResilienceReport compare(const std::vector<CorpusProgram>& corpus, const BenchConfig& config);

/// Two-space indented JSON with sorted keys.
std::string render_json(const ResilienceReport& report);
std::string render_markdown(const ResilienceReport& report);
/// Inverse of render_json. Throws Error on malformed input.
ResilienceReport parse_report_json(std::string_view text);

/// JSON object mapping program name to a list of integer argument vectors.
std::map<std::string, Inputs> parse_inputs_json(std::string_view text);

/// Every `*.gm` file in `dir`, sorted by name, paired with its inputs.
std::vector<CorpusProgram> load_corpus(const std::filesystem::path& dir, const std::filesystem::path& inputs_json);

std::string read_file(const std::filesystem::path& path);

}  // namespace graphmark::bench
