#include <benchmark/benchmark.h>

#include <random>

#include "pnml/metrics.hpp"

using namespace pnml;

namespace {

std::vector<double> scores(int n, double shift, std::mt19937_64& rng) {
    std::normal_distribution<double> unit(shift, 1.0);
    std::vector<double> s(n);
    for (auto& v : s) v = unit(rng);
    return s;
}

void BM_Auroc(benchmark::State& state) {
    std::mt19937_64 rng(31);
    const int n = static_cast<int>(state.range(0));
    const auto pos = scores(n, 1.0, rng), neg = scores(n, 0.0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::auroc(pos, neg));
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

void BM_DetectionAccuracy(benchmark::State& state) {
    std::mt19937_64 rng(32);
    const int n = static_cast<int>(state.range(0));
    const auto pos = scores(n, 1.0, rng), neg = scores(n, 0.0, rng);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::detection_accuracy(pos, neg));
}
BENCHMARK(BM_DetectionAccuracy)->Arg(1000)->Arg(100000);

void BM_Oscr(benchmark::State& state) {
    std::mt19937_64 rng(33);
    const int n = static_cast<int>(state.range(0));
    std::bernoulli_distribution coin(0.8);
    std::vector<metrics::ScoredSample> closed, open;
    for (double s : scores(n, 1.0, rng)) closed.push_back({s, 0, coin(rng)});
    for (double s : scores(n, 0.0, rng)) open.push_back({s, -1, false});
    for (auto _ : state) benchmark::DoNotOptimize(metrics::oscr_curve(closed, open));
}
BENCHMARK(BM_Oscr)->Arg(1000)->Arg(10000);

}  // namespace
