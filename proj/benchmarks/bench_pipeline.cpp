// Hot-path throughput: trace synthesis, interception, normalization, and the
// two classifier forward paths. Run after optimizing anything in core/.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "scanleak/interaction.hpp"
#include "scanleak/nn/model.hpp"
#include "scanleak/normalization.hpp"
#include "scanleak/rng.hpp"
#include "scanleak/scenario.hpp"
#include "scanleak/segmentation.hpp"
#include "scanleak/trace_synth.hpp"

using namespace scanleak;

namespace {

PipelineContext bench_context(double snr) {
  Scenario sc;
  sc.task = "pin";
  sc.sample_rate = 20000.0;
  sc.snr = snr;
  return make_context(sc, 17);
}

TouchEvent bench_event() {
  TouchEvent ev;
  ev.column = 5;
  ev.row = 12;
  ev.label = "5";
  return ev;
}

void BM_synthesize_touch(benchmark::State& state) {
  const PipelineContext ctx = bench_context(static_cast<double>(state.range(0)));
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  for (auto _ : state) {
    const EmTrace t = synthesize_touch_trace(ctx.profile, bench_event(),
                                             ctx.noise, ctx.distance, ++seed,
                                             ctx.synth);
    samples += t.samples.size();
    benchmark::DoNotOptimize(t.samples.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
  state.SetBytesProcessed(static_cast<std::int64_t>(samples * sizeof(float)));
}
BENCHMARK(BM_synthesize_touch)->Arg(0)->Arg(10);

void BM_intercept_all(benchmark::State& state) {
  const PipelineContext ctx = bench_context(10.0);
  const EmTrace trace = synthesize_touch_trace(ctx.profile, bench_event(),
                                               ctx.noise, ctx.distance, 99,
                                               ctx.synth);
  for (auto _ : state) {
    const auto segs = intercept_all(trace, ctx.seg);
    benchmark::DoNotOptimize(segs.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_intercept_all);

void BM_normalize_signal(benchmark::State& state) {
  Rng rng(5);
  std::vector<double> signal(static_cast<std::size_t>(state.range(0)));
  for (double& v : signal) v = rng.normal(0.2, 1.3);
  for (auto _ : state) {
    const auto out = normalize_signal(signal, 167);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_normalize_signal)->Arg(64)->Arg(512)->Arg(4096);

void BM_mlp_forward(benchmark::State& state) {
  const std::size_t batch = static_cast<std::size_t>(state.range(0));
  nn::Model model(nn::mlp_spec(167, 10), 7);
  nn::Tensor x({batch, 167});
  Rng rng(8);
  for (double& v : x.data) v = rng.normal(0.0, 1.0);
  for (auto _ : state) {
    const auto labels = model.predict_labels(x);
    benchmark::DoNotOptimize(labels.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_mlp_forward)->Arg(1)->Arg(32)->Arg(256);

void BM_forest_predict(benchmark::State& state) {
  Rng rng(9);
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  for (int i = 0; i < 600; ++i) {
    const int cls = i % 3;
    std::vector<double> row(6);
    for (double& v : row) v = rng.normal(cls * 1.5, 1.0);
    x.push_back(row);
    y.push_back(cls);
  }
  const Forest forest = train_forest(x, y, ForestConfig{});
  std::size_t i = 0;
  for (auto _ : state) {
    const ForestPrediction p = forest.predict(x[i++ % x.size()]);
    benchmark::DoNotOptimize(p.label);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_forest_predict);

}  // namespace

BENCHMARK_MAIN();
