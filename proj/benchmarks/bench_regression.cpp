#include <benchmark/benchmark.h>

#include <random>

#include "pnml/luckiness.hpp"
#include "pnml/regression.hpp"

using namespace pnml;

namespace {

LabeledDataset make_data(int n, int m, std::mt19937_64& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    LabeledDataset d{Matrix(n, m), Vector(n)};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) d.features(i, j) = unit(rng);
        d.targets(i) = unit(rng);
    }
    return d;
}

void BM_RidgeFit(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto data = make_data(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), rng);
    for (auto _ : state) benchmark::DoNotOptimize(regression::RegressionFit::fit(data, 0.1));
}
BENCHMARK(BM_RidgeFit)->Args({100, 10})->Args({1000, 50})->Args({5000, 100});

void BM_PnmlPredict(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const int m = static_cast<int>(state.range(0));
    const auto fit = regression::RegressionFit::fit(make_data(4 * m, m, rng), 0.1);
    const Vector x = make_data(1, m, rng).features.row(0).transpose();
    for (auto _ : state) benchmark::DoNotOptimize(regression::pnml_predict(fit, x));
}
BENCHMARK(BM_PnmlPredict)->Arg(10)->Arg(100)->Arg(500);

void BM_LpnmlPredict(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const int m = static_cast<int>(state.range(0));
    const auto fit = regression::RegressionFit::fit(make_data(m / 2, m, rng), 1.0);
    const Vector x = make_data(1, m, rng).features.row(0).transpose();
    for (auto _ : state) benchmark::DoNotOptimize(luckiness::lpnml_predict(fit, x));
}
BENCHMARK(BM_LpnmlPredict)->Arg(10)->Arg(100);

}  // namespace
