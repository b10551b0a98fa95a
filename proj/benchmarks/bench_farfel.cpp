// Microbenchmarks for the hot paths: raw engine arithmetic, tagged
// forward duals at increasing nesting depth, reverse taping and
// sweeping, and whole corpus programs end to end.

#include <benchmark/benchmark.h>

#include <cmath>
#include <sstream>
#include <string>

#include "farfel/driver.hpp"
#include "farfel/engine.hpp"
#include "farfel/value.hpp"

namespace {

std::string stdlib_file(const char* name) {
    return std::string(FARFEL_STDLIB_DIR) + "/" + name;
}

// ---- engine primitives ---------------------------------------------------

void BM_EnginePlainArith(benchmark::State& state) {
    farfel::Engine eng;
    farfel::Value x = farfel::Value::real(1.5);
    farfel::Value c = farfel::Value::real(0.9999);
    for (auto _ : state) {
        x = eng.add(eng.mul(x, c), farfel::Value::real(1e-6));
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_EnginePlainArith);

void BM_EngineIntrinsic(benchmark::State& state) {
    farfel::Engine eng;
    farfel::Value x = farfel::Value::real(0.7);
    for (auto _ : state) {
        x = eng.unary(farfel::Intrinsic::Sin, eng.add(x, farfel::Value::real(0.1)));
        benchmark::DoNotOptimize(x);
    }
}
BENCHMARK(BM_EngineIntrinsic);

// One multiply-add on a dual nested `depth` levels deep. Depth 0 is the
// plain-real baseline; each level adds one tag layer that the dispatch
// has to peel.
void BM_NestedDualArith(benchmark::State& state) {
    farfel::Engine eng;
    farfel::Value x = farfel::Value::real(1.25);
    const int depth = static_cast<int>(state.range(0));
    for (int i = 0; i < depth; ++i)
        x = eng.make_dual(eng.fresh_tag(), x, farfel::Value::real(1.0));
    farfel::Value c = farfel::Value::real(0.999);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eng.add(eng.mul(x, x), c));
    }
}
BENCHMARK(BM_NestedDualArith)->Arg(0)->Arg(1)->Arg(2)->Arg(3)->Arg(4);

// Record-and-sweep of x -> x*x*...*x (range(0) multiplies) on one tape.
void BM_ReverseTape(benchmark::State& state) {
    farfel::Engine eng;
    const int ops = static_cast<int>(state.range(0));
    for (auto _ : state) {
        farfel::Tag t = eng.fresh_tag();
        eng.push_tape(t);
        farfel::Value x = eng.make_leaf(t, farfel::Value::real(1.0000001));
        farfel::Value y = x;
        for (int i = 0; i < ops; ++i) y = eng.mul(y, x);
        eng.add_adjoint(t, y.tracer()->node, farfel::Value::real(1.0));
        eng.reverse_sweep(t);
        benchmark::DoNotOptimize(eng.adjoint_of(t, x.tracer()->node));
        eng.pop_tape();
    }
    state.SetItemsProcessed(state.iterations() * ops);
}
BENCHMARK(BM_ReverseTape)->Arg(16)->Arg(256)->Arg(4096);

// ---- whole programs --------------------------------------------------

void run_corpus_program(benchmark::State& state, const char* file,
                        std::vector<std::pair<std::string, farfel::Value>> sets) {
    const std::string path = stdlib_file(file);
    for (auto _ : state) {
        farfel::DriverOptions opt;
        opt.overrides = sets;
        std::vector<farfel::RunRecord> records;
        std::ostringstream err;
        int rc = farfel::run_capture(path, opt, records, err);
        if (rc != 0) {
            state.SkipWithError(err.str().c_str());
            return;
        }
        benchmark::DoNotOptimize(records);
    }
}

void BM_ProgramPhi(benchmark::State& state) { run_corpus_program(state, "phi.far", {}); }
BENCHMARK(BM_ProgramPhi);

void BM_ProgramDeriv1(benchmark::State& state) { run_corpus_program(state, "deriv1.far", {}); }
BENCHMARK(BM_ProgramDeriv1);

void BM_ProgramRootReverse(benchmark::State& state) {
    run_corpus_program(state, "root.far", {{"ADMODE", farfel::Value::integer(2)}});
}
BENCHMARK(BM_ProgramRootReverse);

// The five-deep equilibrium solver, swept over the per-level iteration
// count. Work grows roughly cubically in N, which is why the corpus
// pins N=25.
void BM_ProgramEqlbrm(benchmark::State& state) {
    run_corpus_program(state, "eqlbrm.far",
                       {{"N", farfel::Value::integer(state.range(0))}});
}
BENCHMARK(BM_ProgramEqlbrm)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
