#include <benchmark/benchmark.h>

#include <random>

#include "pnml/overparam.hpp"

using namespace pnml;

namespace {

struct Problem {
    overparam::MinNormFit fit;
    Vector x;
};

Problem make_problem(int n, int m) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> unit(0.0, 1.0);
    LabeledDataset d{Matrix(n, m), Vector(n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) d.features(i, j) = unit(rng);
        d.targets(i) = unit(rng);
    }
    Vector x(m);
    for (int j = 0; j < m; ++j) x(j) = unit(rng);
    return {overparam::MinNormFit::fit(d), x};
}

void BM_EmpiricalRegret(benchmark::State& state) {
    const auto p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(overparam::empirical_regret(p.fit, p.x));
}
BENCHMARK(BM_EmpiricalRegret)->Args({10, 40})->Args({20, 80})->Args({50, 200});

void BM_RegretBound(benchmark::State& state) {
    const auto p = make_problem(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(overparam::regret_upper_bound(p.fit, p.x));
}
BENCHMARK(BM_RegretBound)->Args({20, 80})->Args({50, 200});

void BM_GenieSolve(benchmark::State& state) {
    const auto p = make_problem(20, 80);
    const overparam::GenieSolver solver(p.fit, p.x);
    double y = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solver.solve(y));
        y = y > 3.0 ? -3.0 : y + 0.01;
    }
}
BENCHMARK(BM_GenieSolve);

}  // namespace
