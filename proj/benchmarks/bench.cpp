// bench.cpp -- compilation and decision timings at desk scale.
#include <benchmark/benchmark.h>

#include "rmleq/equiv.hpp"
#include "rmleq/parser.hpp"

using namespace rmleq;

namespace {

const char* kCell = "let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω";
const char* kWrapped = "λx:unit. let c = ref 0 in λy:unit. if !c = 0 then c := 1 else Ω";

void BM_CompileCellRestricted(benchmark::State& state) {
  TermPtr t = parse_term(kCell);
  for (auto _ : state) benchmark::DoNotOptimize(compile_term(t, {}, 2, Encoding::RForml));
}
BENCHMARK(BM_CompileCellRestricted);

void BM_CompileCellPStrict(benchmark::State& state) {
  TermPtr t = parse_term(kCell);
  for (auto _ : state) benchmark::DoNotOptimize(compile_term(t, {}, 2, Encoding::PStrict));
}
BENCHMARK(BM_CompileCellPStrict);

void BM_CompileWrapped(benchmark::State& state) {
  TermPtr t = parse_term(kWrapped);
  for (auto _ : state) benchmark::DoNotOptimize(compile_term(t, {}, 2, Encoding::RForml));
}
BENCHMARK(BM_CompileWrapped);

void BM_DecideEquivalent(benchmark::State& state) {
  Context ctx = {{"f", parse_type("unit -> unit")}};
  TermPtr m = parse_term("f ()");
  TermPtr n = parse_term("f (); ()");
  DecideOptions opts;
  opts.k = 2;
  for (auto _ : state) benchmark::DoNotOptimize(decide(m, n, ctx, opts));
}
BENCHMARK(BM_DecideEquivalent);

void BM_DecideInequivalent(benchmark::State& state) {
  TermPtr m = parse_term(kCell);
  TermPtr n = parse_term("λy:unit. Ω");
  DecideOptions opts;
  opts.k = 2;
  for (auto _ : state) benchmark::DoNotOptimize(decide(m, n, {}, opts));
}
BENCHMARK(BM_DecideInequivalent);

void BM_Emptiness(benchmark::State& state) {
  Wndcma a = compile_term(parse_term(kWrapped), {}, 2, Encoding::RForml);
  for (auto _ : state) {
    Wndcma d = difference(a, a);
    benchmark::DoNotOptimize(is_empty(d));
  }
}
BENCHMARK(BM_Emptiness);

void BM_BoundedComparison(benchmark::State& state) {
  Wndcma a = compile_term(parse_term(kWrapped), {}, 2, Encoding::RForml);
  for (auto _ : state) benchmark::DoNotOptimize(bounded_language_equal(a, a, 8));
}
BENCHMARK(BM_BoundedComparison);

} // namespace

BENCHMARK_MAIN();
