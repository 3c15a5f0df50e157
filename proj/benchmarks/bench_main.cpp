#include <benchmark/benchmark.h>

#include <vector>

#include "ambrosia/ambrosia.hpp"

using namespace ambrosia;

namespace {

std::vector<double> stream(std::size_t n) {
    SyntheticSpec spec;
    spec.kind = SignalKind::sinusoid;
    spec.length = n;
    spec.amplitude = 2.0;
    spec.noise_std = 0.6;
    spec.seed = 1;
    return generate(spec).values();
}

void run_forecaster(benchmark::State& state, const ForecasterConfig& config) {
    const auto xs = stream(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto f = make_forecaster(config);
        double acc = 0.0;
        for (double x : xs) {
            f->observe(x);
            if (f->ready()) {
                acc += f->predict_next();
            }
        }
        benchmark::DoNotOptimize(acc);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_WindowForecaster(benchmark::State& state) {
    run_forecaster(state, ForecasterConfig{});
}

void BM_ArimaRefitEverySample(benchmark::State& state) {
    ForecasterConfig c;
    c.kind = ForecasterKind::arima;
    c.refit_every = 1;
    run_forecaster(state, c);
}

void BM_ArimaFitOnce(benchmark::State& state) {
    ForecasterConfig c;
    c.kind = ForecasterKind::arima;
    run_forecaster(state, c);
}

void BM_Session(benchmark::State& state) {
    const auto series = TimeSeries::from_values(stream(static_cast<std::size_t>(state.range(0))));
    ProtocolConfig c;
    c.delta = 0.8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_session(series, c).samples_sent);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ForestUpdate(benchmark::State& state) {
    const auto xs = stream(4096);
    const ForestConfig config{static_cast<std::size_t>(state.range(0)), 256, 4, 0};
    Forest forest(config, config.shingle);
    std::size_t i = 0;
    Point p(config.shingle);
    for (auto _ : state) {
        for (std::size_t k = 0; k < p.size(); ++k) {
            p[k] = xs[(i + k) % xs.size()];
        }
        benchmark::DoNotOptimize(forest.update(p));
        ++i;
    }
    state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_WindowForecaster)->RangeMultiplier(10)->Range(1000, 100000);
BENCHMARK(BM_ArimaRefitEverySample)->RangeMultiplier(10)->Range(1000, 100000);
BENCHMARK(BM_ArimaFitOnce)->RangeMultiplier(10)->Range(1000, 100000);
BENCHMARK(BM_Session)->Arg(10000);
BENCHMARK(BM_ForestUpdate)->Arg(10)->Arg(40);
BENCHMARK_MAIN();
