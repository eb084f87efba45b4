#include <benchmark/benchmark.h>

#include <cmath>

#include "hydrostore/constitutive.hpp"
#include "hydrostore/init_reg.hpp"
#include "hydrostore/stepper.hpp"

using namespace hydrostore;

namespace {

State bench_state(const GridPtr& g, const HSpec& spec) {
    const InitialData d{
        Field::from_function(g, [](double x, double y) { return 1.0 + 0.5 * std::exp(-20 * ((x - 0.3) * (x - 0.3) + y * y)); }),
        Field::from_function(g, [](double x, double) { return x < 0.5 ? 0.2 : 0.8; }),
        Field::from_function(g, [](double x, double) { return 0.5 + x; })};
    return build_initial_state(d, 100, spec, true);
}

void BM_Step1D(benchmark::State& st) {
    const auto g = Grid::line(static_cast<int>(st.range(0)), 1.0);
    const ModelParams params;
    const Stepper stepper(g, params, StepperConfig{});
    const State s = bench_state(g, params.h);
    for (auto _ : st) benchmark::DoNotOptimize(stepper.step(s));
}
BENCHMARK(BM_Step1D)->Arg(128)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_Step2D(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto g = Grid::rectangle(n, n, 1.0, 1.0);
    ModelParams params;
    params.gamma = 1.0;
    const Stepper stepper(g, params, StepperConfig{});
    const State s = bench_state(g, params.h);
    for (auto _ : st) benchmark::DoNotOptimize(stepper.step(s));
}
BENCHMARK(BM_Step2D)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_PsiInverse(benchmark::State& st) {
    const HSpec spec;
    double e = -5.0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(psi_inverse(e, 0.6, spec));
        e = e > 5.0 ? -5.0 : e + 0.01;
    }
}
BENCHMARK(BM_PsiInverse);

void BM_SolveShifted2D(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto g = Grid::rectangle(n, n, 1.0, 1.0);
    const auto a = assemble_operator(g, 0.0);
    const Vector rhs = Vector::LinSpaced(g->node_count(), 0.0, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(solve_shifted(a, 10.0, rhs));
}
BENCHMARK(BM_SolveShifted2D)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
