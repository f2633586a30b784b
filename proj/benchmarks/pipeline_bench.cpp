#include <benchmark/benchmark.h>

#include "graphmark/encoder.hpp"
#include "graphmark/interpreter.hpp"
#include "graphmark/syntax.hpp"
#include "graphmark/watermark.hpp"

namespace {

namespace gm = graphmark;

const std::vector<std::int64_t> kTrigger = {9, 9};

const gm::lang::Program& sample() {
  static const gm::lang::Program p = gm::lang::parse(R"(
fn main(x, y) {
  s = 0;
  i = 0;
  while (i < 40) {
    s = s + (x * 1234 + y * 77) % 1009;
    i = i + 1;
  }
  print(s);
}
)");
  return p;
}

void BM_Embed(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(gm::watermark::embed(sample(), {state.range(0), kTrigger}));
}
BENCHMARK(BM_Embed)->Arg(472)->Arg(1'000'000);

void BM_Protect(benchmark::State& state) {
  const auto wm = gm::watermark::embed(sample(), {state.range(0), kTrigger});
  for (auto _ : state) benchmark::DoNotOptimize(gm::encoder::protect(wm, kTrigger, {}));
}
BENCHMARK(BM_Protect)->Arg(472)->Arg(1'000'000);

void BM_Interpret(benchmark::State& state) {
  const auto wm = gm::watermark::embed(sample(), {472, kTrigger});
  const gm::lang::Program program = state.range(0) ? gm::encoder::protect(wm, kTrigger, {}).program : wm;
  const std::vector<std::int64_t> args = {3, 4};
  for (auto _ : state) benchmark::DoNotOptimize(gm::lang::interpret(program, args));
}
BENCHMARK(BM_Interpret)->ArgName("protected")->Arg(0)->Arg(1);

}  // namespace
