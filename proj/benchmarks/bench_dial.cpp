#include <benchmark/benchmark.h>

#include <random>

#include "pnml/dial.hpp"

using namespace pnml;

namespace {

std::vector<Matrix> tables(int members, int rows, int classes, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<Matrix> out;
    for (int m = 0; m < members; ++m) {
        Matrix t(rows, classes);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < classes; ++c) t(r, c) = u(rng);
            t.row(r) /= t.row(r).sum();
        }
        out.push_back(t);
    }
    return out;
}

void BM_DialSelect(benchmark::State& state) {
    std::mt19937_64 rng(21);
    const int candidates = static_cast<int>(state.range(0));
    const auto cand = tables(20, candidates, 10, rng);
    const auto test = tables(20, 128, 10, rng);
    for (auto _ : state) benchmark::DoNotOptimize(dial::dial_select(cand, test));
    state.SetItemsProcessed(state.iterations() * candidates);
}
BENCHMARK(BM_DialSelect)->Arg(64)->Arg(512);

}  // namespace
