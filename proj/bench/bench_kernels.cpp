// SPDX-License-Identifier: Apache-2.0
// Serial reference kernels against their OpenMP counterparts. Set
// OMP_NUM_THREADS to compare thread counts.

#include <benchmark/benchmark.h>

#include <cstdio>
#include <vector>

#include "deepauto/data/series.hpp"
#include "deepauto/model/config.hpp"
#include "deepauto/model/network.hpp"
#include "deepauto/rng.hpp"
#include "deepauto/spatial/graph.hpp"

using namespace deepauto;

namespace {

model::DeepAutoConfig bench_config() {
  auto c = model::default_config(data::Task::load);
  c.window = {.n_recent = 20, .n_periodic = 2, .n_seasonal = 0, .period_steps = 96, .season_steps = 672};
  c.hidden_r = c.hidden_p = 16;
  c.ext_embed_dim = 8;
  c.use_external = true;
  c.output.horizons = {1, 8};
  c.derive_input_dim();
  return c;
}

std::vector<data::WindowedSample> samples(const model::DeepAutoConfig& c, std::size_t n) {
  Rng rng(1);
  auto rows = [&](std::size_t r) {
    nn::Tensor2 t(r, c.input_dim);
    for (auto& v : t.values()) v = rng.uniform();
    return t;
  };
  std::vector<data::WindowedSample> out(n);
  for (auto& s : out) {
    s.x_recent = rows(c.window.n_recent);
    s.x_periodic = rows(c.window.n_periodic);
    s.x_seasonal = rows(c.window.n_seasonal);
    s.external.assign(data::ExternalFeatures::kSize, 0.0);
    for (auto& v : s.external) v = rng.uniform(-1, 1);
    s.target = {rng.uniform(), rng.uniform()};
  }
  return out;
}

struct Batch {
  model::DeepAutoConfig config = bench_config();
  model::DeepAutoParams params = model::DeepAutoParams::initialized(config, 3);
  std::vector<data::WindowedSample> data = samples(config, 256);
  std::vector<const data::WindowedSample*> ptrs;
  Batch() {
    for (const auto& s : data) ptrs.push_back(&s);
  }
};

const Batch& batch() {
  static const Batch b;
  return b;
}

void BM_GradientSerial(benchmark::State& state) {
  const auto& b = batch();
  auto grads = model::zeros_like(b.params);
  for (auto _ : state)
    benchmark::DoNotOptimize(model::loss_and_gradients_serial(b.ptrs, b.params, {}, &grads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.ptrs.size()));
}

void BM_GradientOpenMP(benchmark::State& state) {
  const auto& b = batch();
  auto grads = model::zeros_like(b.params);
  model::BatchGradient kernel;
  for (auto _ : state) benchmark::DoNotOptimize(kernel(b.ptrs, b.params, {}, &grads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.ptrs.size()));
}

void BM_PredictSerial(benchmark::State& state) {
  const auto& b = batch();
  for (auto _ : state) benchmark::DoNotOptimize(model::predict_batch_serial(b.data, b.params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.data.size()));
}

void BM_PredictOpenMP(benchmark::State& state) {
  const auto& b = batch();
  for (auto _ : state) benchmark::DoNotOptimize(model::predict_batch(b.data, b.params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.data.size()));
}

std::vector<data::KpiSeries> graph_cells(std::size_t n) {
  Rng rng(2);
  std::vector<data::KpiSeries> cells;
  for (std::size_t i = 0; i < n; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "c%04zu", i);  // build_graph wants sorted ids
    auto s = data::make_empty_series(id, 0, 900, {"load"}, 2000);
    for (std::size_t t = 0; t < s.length(); ++t) {
      s.values(t, 0) = rng.uniform();
      s.missing[t] = 0;
    }
    cells.push_back(std::move(s));
  }
  return cells;
}

void BM_GraphSerial(benchmark::State& state) {
  const auto cells = graph_cells(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spatial::build_graph_serial(cells, 0, 0, 2000));
}

void BM_GraphOpenMP(benchmark::State& state) {
  const auto cells = graph_cells(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spatial::build_graph(cells, 0, 0, 2000));
}

}  // namespace

BENCHMARK(BM_GradientSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientOpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictOpenMP)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GraphSerial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GraphOpenMP)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
