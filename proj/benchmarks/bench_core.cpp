#include <benchmark/benchmark.h>

#include <memory>

#include "fairflip/attacks.hpp"
#include "fairflip/estimator.hpp"
#include "fairflip/forecaster.hpp"
#include "fairflip/oracle.hpp"
#include "fairflip/zoo.hpp"

using namespace fairflip;

static void BM_TranscriptTree_Majority(benchmark::State& state) {
    auto spec = zoo::majority(int(state.range(0)));
    for (auto _ : state) {
        TranscriptTree tree(spec);
        benchmark::DoNotOptimize(tree.leaves().size());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TranscriptTree_Majority)->DenseRange(3, 9, 2)->Complexity();

static void BM_OptimalFailstop_Majority(benchmark::State& state) {
    TranscriptTree tree(zoo::majority(int(state.range(0))));
    for (auto _ : state) {
        auto opt = optimal_failstop(tree, PartyId::A, 0);
        benchmark::DoNotOptimize(opt.bias);
    }
}
BENCHMARK(BM_OptimalFailstop_Majority)->DenseRange(3, 9, 2);

static void BM_ForecastOracle_Build(benchmark::State& state) {
    auto tree = std::make_shared<TranscriptTree>(zoo::majority(7));
    for (auto _ : state) {
        ForecastOracle oracle(tree, int(state.range(0)));
        benchmark::DoNotOptimize(oracle.measured_c());
    }
}
BENCHMARK(BM_ForecastOracle_Build)->Arg(1)->Arg(8)->Arg(30);

static void BM_MeasureBias_CI_Majority7(benchmark::State& state) {
    auto tree = std::make_shared<TranscriptTree>(zoo::majority(7));
    auto strat = ci_attack(tree, PartyId::A, 0);
    for (auto _ : state) {
        auto rep = measure_bias(*tree, strat);
        benchmark::DoNotOptimize(rep.pr_one);
    }
}
BENCHMARK(BM_MeasureBias_CI_Majority7);

static void BM_EstimateG_Sufficient(benchmark::State& state) {
    auto tree = std::make_shared<TranscriptTree>(zoo::majority(3));
    ForecastOracle oracle(tree, 1);
    auto seq = oracle.forecast_sequence(std::vector<int>{1, 0});
    std::vector<Forecast> prefix{seq[1], seq[2]};
    auto params = EstimatorParams::derive(oracle.measured_c(), 3, 0.25); // v ~ 3.8e9
    uint64_t seed = 0;
    for (auto _ : state) {
        auto g = estimate_g(oracle, prefix, ++seed, params);
        benchmark::DoNotOptimize(g);
    }
}
BENCHMARK(BM_EstimateG_Sufficient);

static void BM_Certify_SkewedGap(benchmark::State& state) {
    auto tree = std::make_shared<TranscriptTree>(zoo::skewed_gap(int(state.range(0))));
    auto oracle = std::make_shared<ForecastOracle>(tree, 8);
    for (auto _ : state) {
        auto rep = a_star_certify(oracle, 0.0);
        benchmark::DoNotOptimize(rep.measured_bias);
    }
}
BENCHMARK(BM_Certify_SkewedGap)->Arg(3)->Arg(5)->Arg(7);

BENCHMARK_MAIN();
