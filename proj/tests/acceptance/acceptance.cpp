// SPDX-License-Identifier: Apache-2.0
// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "deepauto/data/analysis.hpp"
#include "deepauto/data/scaler.hpp"
#include "deepauto/data/series.hpp"
#include "deepauto/data/split.hpp"
#include "deepauto/error.hpp"
#include "deepauto/eval/baselines.hpp"
#include "deepauto/eval/report.hpp"
#include "deepauto/model/dataset.hpp"
#include "deepauto/model/grid.hpp"
#include "deepauto/model/io.hpp"
#include "deepauto/model/train.hpp"
#include "deepauto/nn/losses.hpp"
#include "deepauto/rng.hpp"
#include "deepauto/stream/engine.hpp"
#include "deepauto/stream/prediction.hpp"
#include "deepauto/stream/server.hpp"
#include "deepauto/synth/generator.hpp"
#include "deepauto/synth/replay.hpp"
#include "support/fixtures.hpp"
#include "support/net.hpp"
#include "support/oracles.hpp"

using namespace deepauto;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Steady = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Steady::time_point t0) { return std::chrono::duration<double>(Steady::now() - t0).count(); }

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("deepauto_accept_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------------------
// shared data

const std::vector<data::CellRecord>& default_records() {
  static const auto r = synth::generate(synth::default_load_config());
  return r;
}

const model::CellSeriesSet& default_cells() {
  static const auto c = model::assemble_series(default_records(), data::Task::load, 900);
  return c;
}

/// Quarter-hour load model used for the locality grid and the comparison.
model::DeepAutoConfig grid_base_config() {
  auto c = model::default_config(data::Task::load);
  c.step_seconds = 900;
  c.window.period_steps = 96;
  c.window.season_steps = 672;
  c.hidden_r = c.hidden_p = c.hidden_s = 16;
  c.ext_embed_dim = 8;
  c.output.horizons = {1, 8};
  c.batch_size = 256;
  c.max_epochs = 40;
  c.patience = 8;
  c.derive_input_dim();
  return c;
}

model::PrepareOptions grid_prepare_options() {
  model::PrepareOptions po;
  po.anchor_stride = 2;
  return po;
}

struct GridRun {
  model::GridReport report;
  double seconds = 0.0;
};

const GridRun& grid_run() {
  static const GridRun run = [] {
    const auto t0 = Steady::now();
    GridRun g;
    g.report = model::grid_search(default_cells(), grid_base_config(), model::locality_ladder(96, 672),
                                  grid_prepare_options(), true);
    g.seconds = seconds_since(t0);
    return g;
  }();
  return run;
}

std::vector<data::CellRecord> sorted(std::vector<data::CellRecord> r) {
  std::stable_sort(r.begin(), r.end(), [](const auto& a, const auto& b) { return a.ts < b.ts; });
  return r;
}

/// Randomly initialised load model with a fixed scaler (load in [0,1],
/// UE in [0,300]).
model::ModelBundle load_bundle(model::DeepAutoConfig c, std::uint64_t seed) {
  c.derive_input_dim();
  model::ModelBundle b{c, model::DeepAutoParams::initialized(c, seed), {}};
  b.scaler.min = {0.0, 0.0};
  b.scaler.max = {1.0, 300.0};
  b.scaler.constant = {0, 0};
  return b;
}

json get_json(httplib::Client& http, const std::string& path) {
  auto r = http.Get(path);
  if (!r) throw Error("GET " + path + " failed");
  return json::parse(r->body);
}

/// Polls /health until `lines` records have been accounted for.
bool wait_ingested(httplib::Client& http, std::uint64_t lines, std::chrono::seconds timeout) {
  const auto deadline = Steady::now() + timeout;
  while (Steady::now() < deadline) {
    const auto h = get_json(http, "/health");
    const auto seen = h["ingested"].get<std::uint64_t>() + h["malformed"].get<std::uint64_t>() +
                      h["out_of_range"].get<std::uint64_t>();
    if (seen >= lines) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  return false;
}

// ---------------------------------------------------------------------------
// criteria

Outcome c1_gradients() {
  const auto t0 = Steady::now();
  const auto c = testing::micro_config();
  double worst_mmse = 0.0, worst_kl = 0.0;
  std::string where;
  for (std::uint64_t seed : {1, 2, 3}) {
    Rng rng(seed + 10);
    auto p = testing::micro_params(c, seed);
    std::vector<data::WindowedSample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(testing::random_sample(c, rng));
    const auto m = testing::check_model_gradients(p, batch, {model::LossKind::mmse, 4.0});
    if (m.max_relative_error > worst_mmse) {
      worst_mmse = m.max_relative_error;
      where = m.worst_parameter;
    }

    auto q = testing::micro_params(c, seed, 4);
    std::vector<data::WindowedSample> hist;
    for (int i = 0; i < 4; ++i) hist.push_back(testing::random_sample(c, rng, 4));
    const auto k = testing::check_model_gradients(q, hist, {model::LossKind::kl, 0.0});
    worst_kl = std::max(worst_kl, k.max_relative_error);
  }
  const double secs = seconds_since(t0);
  return {worst_mmse <= 1e-4 && worst_kl <= 1e-4 && secs < 10.0,
          fmt("max rel err mmse %.2e (%s) kl %.2e, limit 1e-4; %.2f s < 10 s", worst_mmse, where.c_str(), worst_kl,
              secs)};
}

Outcome c2_loss_oracles() {
  using nn::Tensor2;
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Tensor2 y(8, 3), yh(8, 3);
    for (auto& v : y.values()) v = rng.uniform();
    for (auto& v : yh.values()) v = rng.uniform();
    worst = std::max(worst, std::abs(nn::mmse_loss(y, yh, 0.0) - nn::mse(y, yh)));
  }
  const double mmse = nn::mmse_loss(Tensor2(1, 1, {0.5}), Tensor2(1, 1, {0.7}), 4.0);
  const double kl_half = nn::kl_loss(Tensor2(1, 2, {1.0, 0.0}), Tensor2(1, 2, {0.5, 0.5}));
  const double kl_skew = nn::kl_loss(Tensor2(1, 2, {0.5, 0.5}), Tensor2(1, 2, {0.9, 0.1}));

  const double e_mmse = std::max(std::abs(mmse - testing::frozen("mmse_example")), std::abs(mmse - 0.0054134113));
  const double e_half =
      std::max(std::abs(kl_half - testing::frozen("kl_onehot_vs_half")), std::abs(kl_half - std::log(2.0)));
  const double e_skew =
      std::max(std::abs(kl_skew - testing::frozen("kl_half_vs_skewed")), std::abs(kl_skew - 0.5108256238));
  const bool pass = worst <= 1e-12 && e_mmse <= 1e-9 && e_half <= 1e-9 && e_skew <= 1e-9;
  return {pass, fmt("|mmse(a=0)-mse| %.1e <= 1e-12; mmse %.10f err %.1e, kl %.10f err %.1e, kl %.10f err %.1e "
                    "(<= 1e-9)",
                    worst, mmse, e_mmse, kl_half, e_half, kl_skew, e_skew)};
}

Outcome c3_locality_grid() {
  const auto& g = grid_run();
  std::vector<double> v;
  std::string trace;
  for (const auto& row : g.report.rows) {
    if (!row.metric) return {false, "candidate " + row.candidate.label + " failed: " + row.error};
    v.push_back(*row.metric);
    trace += fmt("%s%.6f", trace.empty() ? "" : " -> ", *row.metric);
  }
  bool monotone = v.size() == 4;
  for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i] <= v[i - 1];
  const double recent_best = std::min(v[0], v[1]);
  const double gain = 1.0 - v.back() / recent_best;
  const bool pass = monotone && gain >= 0.05 && g.seconds < 15 * 60;
  return {pass, fmt("val rmse %s; monotone %s; periodic+external %.1f%% below recent-only (>= 5%%); %.0f s < 900 s",
                    trace.c_str(), monotone ? "yes" : "no", 100.0 * gain, g.seconds)};
}

Outcome c4_baseline_margins() {
  const auto& g = grid_run();
  // the ranked-best candidate, trained on the grid's shared splits
  const model::GridRow* best = nullptr;
  for (const auto& row : g.report.rows)
    if (row.rank == 1) best = &row;
  if (!best || !best->trained) return {false, "grid produced no model"};

  auto c = grid_base_config();
  c.window = best->candidate.window;
  c.use_external = best->candidate.use_external;
  auto po = grid_prepare_options();
  po.min_anchor = 2 * 96;
  const auto ds = model::prepare_dataset(default_cells(), c, po);

  eval::DeepAutoPredictor da(std::make_shared<const model::DeepAutoParams>(best->trained->params));
  eval::NaivePredictor naive(ds.config.target_spec());
  eval::RidgeArPredictor ridge;
  ridge.fit(ds.splits.train, 1e-3, true);
  const std::vector<const eval::Predictor*> ps{&da, &naive, &ridge};
  const std::vector<std::size_t> hz{1, 8};
  const auto rep = eval::compare_report(ps, ds.splits.test, hz);

  const double d1 = rep.find("deepauto", 1).metrics.rmse, d8 = rep.find("deepauto", 8).metrics.rmse;
  const double n1 = rep.find("naive", 1).metrics.rmse, n8 = rep.find("naive", 8).metrics.rmse;
  const double r8 = rep.find("ridge_ar", 8).metrics.rmse;
  const double g1 = 1.0 - d1 / n1, g8 = 1.0 - d8 / n8;
  const bool pass = g1 >= 0.10 && g8 >= 0.25 && d8 < r8;
  return {pass, fmt("%s: h1 %.5f vs naive %.5f (%.1f%% >= 10%%), h8 %.5f vs naive %.5f (%.1f%% >= 25%%), "
                    "ridge h8 %.5f",
                    best->candidate.label.c_str(), d1, n1, 100 * g1, d8, n8, 100 * g8, r8)};
}

Outcome c5_rsrq_kl() {
  const auto recs = synth::generate(synth::default_rsrq_config());
  const auto cells = model::assemble_series(recs, data::Task::rsrq, 300);
  auto c = model::default_config(data::Task::rsrq);
  c.hidden_r = c.hidden_p = c.hidden_s = 16;
  c.ext_embed_dim = 8;
  c.window.n_recent = 5;
  c.batch_size = 256;
  c.max_epochs = 15;
  c.patience = 5;
  c.use_external = true;
  c.derive_input_dim();
  model::PrepareOptions po;
  po.anchor_stride = 2;
  const auto ds = model::prepare_dataset(cells, c, po);
  const auto trained = model::train(ds.splits.train, ds.splits.val, ds.config);

  eval::DeepAutoPredictor da(std::make_shared<const model::DeepAutoParams>(trained.params));
  eval::NaivePredictor naive(ds.config.target_spec());
  const std::vector<const eval::Predictor*> ps{&da, &naive};
  const auto rows = eval::compare_kl(ps, ds.splits.test);
  const double ratio = rows[0].kl / rows[1].kl;
  return {ratio <= 0.5, fmt("test KL deepauto %.5f, naive %.5f, ratio %.3f <= 0.5", rows[0].kl, rows[1].kl, ratio)};
}

Outcome c6_acf_peaks() {
  const auto acf = data::autocorrelation(default_cells().series.front().channel(0), 672 + 12);
  auto peak = [&](std::size_t lag, double& margin) {
    const bool local = acf[lag] > acf[lag - 1] && acf[lag] > acf[lag + 1];
    margin = acf[lag] - std::max(acf[lag - 12], acf[lag + 12]);
    return local && margin >= 0.1;
  };
  double m_day = 0.0, m_week = 0.0;
  const bool day = peak(96, m_day), week = peak(672, m_week);
  return {day && week, fmt("acf(1 day) %.3f, +%.3f over +-3 h; acf(7 days) %.3f, +%.3f over +-3 h (>= 0.1, local max "
                           "%s/%s)",
                           acf[96], m_day, acf[672], m_week, day ? "yes" : "no", week ? "yes" : "no")};
}

Outcome c7_offline_online() {
  auto sc = synth::default_load_config();
  sc.n_cells = 100;
  sc.days = 2;
  sc.step_seconds = 60;
  sc.missing_rate = 0.0;
  const auto recs = sorted(synth::generate(sc));

  auto mc = model::default_config(data::Task::load);
  mc.window = {.n_recent = 10, .n_periodic = 1, .n_seasonal = 0, .period_steps = 1440, .season_steps = 10080};
  mc.hidden_r = mc.hidden_p = 8;
  mc.ext_embed_dim = 4;
  mc.use_external = true;
  mc.output.horizons = {1, 5};
  const auto bundle = load_bundle(mc, 21);
  const auto offline = stream::batch_predict(recs, bundle);

  stream::Engine engine;
  engine.load_model(bundle);
  stream::ServerOptions opts;
  opts.http = stream::parse_endpoint(":0");
  opts.ingest = stream::parse_endpoint(":0");
  opts.firehose = stream::parse_endpoint(":0");
  stream::Server server(engine, opts);
  server.start();

  std::vector<stream::PredictionRecord> online;
  testing::TcpClient fire(server.firehose_port());
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  std::thread reader([&] {
    while (online.size() < offline.size()) {
      auto line = fire.read_line(std::chrono::seconds(30));
      if (!line) break;
      online.push_back(stream::PredictionRecord::from_json(json::parse(*line)));
    }
  });

  httplib::Client http("127.0.0.1", server.http_port());
  {
    testing::TcpClient in(server.ingest_port());
    std::string chunk;
    for (const auto& r : recs) {
      chunk += data::format_record(r);
      chunk += '\n';
      if (chunk.size() > (1 << 16)) {
        in.send(chunk);
        chunk.clear();
      }
    }
    in.send(chunk);
  }
  const bool drained = wait_ingested(http, recs.size(), std::chrono::seconds(120));
  http.Post("/flush", "", "text/plain");
  reader.join();
  server.stop();

  auto key = [](const stream::PredictionRecord& p) { return std::tie(p.cell, p.anchor_ts); };
  std::sort(online.begin(), online.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  std::size_t mismatches = 0;
  if (online.size() == offline.size())
    for (std::size_t i = 0; i < online.size(); ++i)
      mismatches += key(online[i]) != key(offline[i]) || online[i].values != offline[i].values ||
                    online[i].horizons != offline[i].horizons;
  const bool pass = drained && online.size() == offline.size() && mismatches == 0 && sc.n_cells >= 100;
  return {pass, fmt("%zu cells x %zu days, %zu records: served %zu predictions, batch %zu, %zu differ", sc.n_cells,
                    sc.days, recs.size(), online.size(), offline.size(), mismatches)};
}

Outcome c8_latency() {
  auto sc = synth::default_load_config();
  sc.n_cells = 1000;
  sc.days = 1;
  sc.step_seconds = 60;
  const std::int64_t minutes = 40;
  std::vector<data::CellRecord> recs;
  for (auto& r : sorted(synth::generate(sc)))
    if (r.ts < sc.start_ts + minutes * 60) recs.push_back(std::move(r));

  auto mc = model::default_config(data::Task::load);
  mc.use_external = true;
  const auto bundle = load_bundle(mc, 5);

  stream::Engine engine;
  engine.load_model(bundle);
  stream::ServerOptions opts;
  opts.http = stream::parse_endpoint(":0");
  opts.ingest = stream::parse_endpoint(":0");
  stream::Server server(engine, opts);
  server.start();
  httplib::Client http("127.0.0.1", server.http_port());

  const double speedup = 60.0;
  {
    testing::TcpClient in(server.ingest_port());
    synth::replay(recs, speedup, [&](const data::CellRecord& r) { in.send(data::format_record(r) + "\n"); });
  }
  wait_ingested(http, recs.size(), std::chrono::seconds(30));
  const auto h = get_json(http, "/health");
  server.stop();

  const auto predictions = h["predictions"].get<std::uint64_t>();
  if (h["latency_p99_ms"].is_null()) return {false, "no predictions were made"};
  const double p99 = h["latency_p99_ms"].get<double>(), p50 = h["latency_p50_ms"].get<double>();
  return {p99 < 1000.0 && h["cells"] == sc.n_cells,
          fmt("%zu cells, dt 60 s, %.0fx replay of %lld min: %llu predictions, latency p50 %.2f ms, p99 %.2f ms "
              "< 1000 ms",
              sc.n_cells, speedup, static_cast<long long>(minutes), static_cast<unsigned long long>(predictions), p50,
              p99)};
}

Outcome c9_determinism_persistence() {
  synth::SynthConfig sc = synth::default_load_config();
  sc.n_cells = 4;
  sc.days = 9;
  sc.n_clusters = 2;
  const auto cells = model::assemble_series(synth::generate(sc), data::Task::load, 900);
  auto c = grid_base_config();
  c.window = {.n_recent = 4, .n_periodic = 0, .n_seasonal = 0, .period_steps = 96, .season_steps = 672};
  c.hidden_r = 4;
  c.ext_embed_dim = 3;
  c.use_external = true;
  c.output.horizons = {1, 2};
  c.batch_size = 64;
  c.max_epochs = 2;
  c.seed = 5;
  c.derive_input_dim();

  auto train_bytes = [&](std::uint64_t seed) {
    auto cfg = c;
    cfg.seed = seed;
    const auto ds = model::prepare_dataset(cells, cfg);
    auto res = model::train(ds.splits.train, ds.splits.val, ds.config);
    return model::save_model({ds.config, std::move(res.params), ds.scaler});
  };
  const std::string a = train_bytes(5), b = train_bytes(5), other = train_bytes(6);
  const bool same_seed = a == b && a != other;
  const bool round_trip = model::save_model(model::load_model(a)) == a;

  auto rejected = [](std::string bytes) {
    try {
      (void)model::load_model(bytes);
      return false;
    } catch (const FormatError&) {
      return true;
    }
  };
  std::string flipped = a, bad_magic = a;
  flipped[flipped.size() / 2] ^= 0x20;
  bad_magic[0] = 'X';
  const bool rejects = rejected(flipped) && rejected(a.substr(0, a.size() / 2)) && rejected(a.substr(0, 3)) &&
                       rejected(bad_magic) && rejected("");

  // a corrupt reload leaves the server running on the old model
  const auto good = (scratch() / "good.daut").string(), corrupt = (scratch() / "corrupt.daut").string();
  model::save_model_file(good, model::load_model(a));
  std::ofstream(corrupt, std::ios::binary) << flipped;
  stream::Engine engine;
  engine.load_model(model::load_model_file(good));
  stream::ServerOptions opts;
  opts.http = stream::parse_endpoint(":0");
  opts.ingest = stream::parse_endpoint(":0");
  opts.model_path = good;
  stream::Server server(engine, opts);
  server.start();
  httplib::Client http("127.0.0.1", server.http_port());
  auto r = http.Post("/reload", corrupt, "text/plain");
  const int reload_status = r ? r->status : -1;
  std::string feed;
  for (std::int64_t t = 0; t < 8; ++t) {
    feed += data::format_record({data::Topic::load, "x", sc.start_ts + 900 * t, 0.3}) + "\n";
    feed += data::format_record({data::Topic::ue, "x", sc.start_ts + 900 * t, 90.0}) + "\n";
  }
  {
    testing::TcpClient in(server.ingest_port());
    in.send(feed);
  }
  wait_ingested(http, 16, std::chrono::seconds(10));
  http.Post("/flush", "", "text/plain");
  auto pred = http.Get("/predictions/x");
  const bool serving = pred && pred->status == 200 && engine.model()->version == 1;
  server.stop();

  const bool pass = same_seed && round_trip && rejects && reload_status == 409 && serving;
  return {pass, fmt("same seed identical %s, other seed differs %s; save/load/save exact %s; corrupt, truncated "
                    "and bad-magic rejected %s; corrupt reload -> %d, still serving %s",
                    a == b ? "yes" : "no", a != other ? "yes" : "no", round_trip ? "yes" : "no",
                    rejects ? "yes" : "no", reload_status, serving ? "yes" : "no")};
}

Outcome c10_unit_contracts() {
  auto counts = [](std::size_t n) {
    const auto s = data::split_4_1_1(n);
    return std::vector<std::size_t>{s.train_size(), s.val_size(), s.test_size()};
  };
  using V = std::vector<std::size_t>;
  const bool splits = counts(600) == V{400, 100, 100} && counts(6) == V{4, 1, 1} && counts(601) == V{400, 100, 101};

  Rng rng(3);
  nn::Tensor2 m(200, 4);
  for (auto& v : m.values()) v = rng.uniform(-50, 50);
  const auto s = data::fit_scaler(m);
  nn::Tensor2 x = m;
  data::apply_scaler(s, x);
  data::invert_scaler(s, x);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) worst = std::max(worst, std::abs(x[i] - m[i]));

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto fill = [](const std::vector<double>& v) {
    auto series = data::make_empty_series("c", 0, 60, {"load"}, v.size());
    for (std::size_t t = 0; t < v.size(); ++t)
      if (!std::isnan(v[t])) {
        series.values(t, 0) = v[t];
        series.missing[t] = 0;
      }
    return data::interpolate_missing(series).channel(0);
  };
  using D = std::vector<double>;
  const bool interp = fill({1, nan, 3}) == D{1, 2, 3} && fill({nan, 2, nan}) == D{2, 2, 2} &&
                      fill({0, nan, nan, 0.9}) == D{0, 0.3, 0.6, 0.9};
  return {splits && worst <= 1e-12 && interp,
          fmt("4:1:1 counts %s; scaler round trip max err %.1e <= 1e-12; interpolation examples %s",
              splits ? "exact" : "wrong", worst, interp ? "exact" : "wrong")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient suite", c1_gradients},
      {2, "loss oracles", c2_loss_oracles},
      {3, "locality grid trend", c3_locality_grid},
      {4, "margins over baselines", c4_baseline_margins},
      {5, "rsrq distribution KL", c5_rsrq_kl},
      {6, "daily and weekly ACF peaks", c6_acf_peaks},
      {7, "offline/online equivalence", c7_offline_online},
      {8, "streaming latency", c8_latency},
      {9, "determinism and persistence", c9_determinism_persistence},
      {10, "split/scale/interpolate contracts", c10_unit_contracts},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto t0 = Steady::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s C%-2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  return failed == 0 ? 0 : 1;
}
