// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <limits>

#include "deepauto/error.hpp"
#include "deepauto/model/dataset.hpp"
#include "deepauto/model/grid.hpp"
#include "deepauto/model/io.hpp"
#include "deepauto/model/network.hpp"
#include "deepauto/model/train.hpp"
#include "deepauto/nn/losses.hpp"
#include "deepauto/synth/generator.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace deepauto;
using namespace deepauto::model;
using deepauto::testing::micro_config;
using deepauto::testing::micro_params;
using deepauto::testing::random_sample;

namespace {

std::vector<data::WindowedSample> random_batch(const DeepAutoConfig& c, std::size_t n, std::uint64_t seed,
                                               std::size_t bins = 0) {
  Rng rng(seed);
  std::vector<data::WindowedSample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_sample(c, rng, bins));
  return out;
}

std::vector<const data::WindowedSample*> pointers(const std::vector<data::WindowedSample>& v) {
  std::vector<const data::WindowedSample*> p;
  for (const auto& s : v) p.push_back(&s);
  return p;
}

/// Small synthetic load dataset at 15-minute steps.
CellSeriesSet small_cells(std::size_t n_cells = 4, std::size_t days = 4) {
  auto sc = synth::default_load_config();
  sc.n_cells = n_cells;
  sc.days = days;
  sc.seed = 99;
  return assemble_series(synth::generate(sc), data::Task::load, sc.step_seconds);
}

DeepAutoConfig small_config() {
  DeepAutoConfig c = default_config(data::Task::load);
  c.step_seconds = 900;
  c.window = {.n_recent = 4, .n_periodic = 1, .n_seasonal = 0, .period_steps = 96, .season_steps = 672};
  c.hidden_r = c.hidden_p = 4;
  c.ext_embed_dim = 3;
  c.output.horizons = {1, 4};
  c.batch_size = 64;
  c.max_epochs = 3;
  return c;
}

}  // namespace

TEST_CASE("zero parameters give sigmoid 0.5 and a uniform histogram") {
  const auto load = default_config(data::Task::load);
  Rng rng(1);
  const auto out = forward(random_sample(load, rng), DeepAutoParams::zeros(load));
  REQUIRE(out.size() == 3);
  for (double v : out) CHECK(v == 0.5);

  const auto rsrq = default_config(data::Task::rsrq);
  const auto pdf = forward(random_sample(rsrq, rng, 35), DeepAutoParams::zeros(rsrq));
  REQUIRE(pdf.size() == 35);
  for (double v : pdf) CHECK(v == doctest::Approx(1.0 / 35).epsilon(1e-15));
}

TEST_CASE("disabled branches are not instantiated") {
  auto c = default_config(data::Task::load);
  c.use_external = false;
  const auto p = DeepAutoParams::zeros(c);
  CHECK(p.lstm_r.has_value());
  CHECK_FALSE(p.lstm_p.has_value());
  CHECK_FALSE(p.lstm_s.has_value());
  CHECK(p.ext_net.empty());
  CHECK(p.fusion_dim() == c.hidden_r);
  // 4 gates x (in + hidden + bias) + 3 peepholes, then the head
  const std::size_t lstm = 4 * c.hidden_r * (2 + c.hidden_r) + 4 * c.hidden_r + 3 * c.hidden_r;
  CHECK(p.parameter_count() == lstm + 3 * c.hidden_r + 3);
}

TEST_CASE("branch ablation: zero-weighted branch equals the model without it") {
  auto with = micro_config();
  auto without = with;
  without.window.n_periodic = 0;
  without.window.n_seasonal = 0;
  auto full = micro_params(with, 3);
  // silence the periodic and seasonal columns of the head
  const std::size_t hr = with.hidden_r, hp = with.hidden_p, hs = with.hidden_s;
  for (std::size_t r = 0; r < full.head.W.rows(); ++r)
    for (std::size_t k = hr; k < hr + hp + hs; ++k) full.head.W(r, k) = 0.0;

  DeepAutoParams reduced = DeepAutoParams::zeros(without);
  reduced.lstm_r = full.lstm_r;
  reduced.ext_net = full.ext_net;
  reduced.head.b = full.head.b;
  for (std::size_t r = 0; r < full.head.W.rows(); ++r) {
    for (std::size_t k = 0; k < hr; ++k) reduced.head.W(r, k) = full.head.W(r, k);
    for (std::size_t k = 0; k < with.ext_embed_dim; ++k) reduced.head.W(r, hr + k) = full.head.W(r, hr + hp + hs + k);
  }
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    auto s = random_sample(with, rng);
    const auto a = forward(s, full);
    s.x_periodic = nn::Tensor2(0, with.input_dim);
    s.x_seasonal = nn::Tensor2(0, with.input_dim);
    // equal up to summation order inside the head
    const auto b = forward(s, reduced);
    REQUIRE(b.size() == a.size());
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(b[j] - a[j]) <= 1e-14);
  }
}

TEST_CASE("recent-only scalar model matches a hand composition") {
  auto c = default_config(data::Task::load);
  c.window = {.n_recent = 3, .n_periodic = 0, .n_seasonal = 0, .period_steps = 96, .season_steps = 672};
  c.hidden_r = 1;
  c.use_external = false;
  c.output.horizons = {1};
  auto p = DeepAutoParams::zeros(c);
  // channel 0 only, every weight 0.1 as in the scalar oracle
  auto& l = *p.lstm_r;
  for (auto* w : {&l.W_xi, &l.W_xf, &l.W_xc, &l.W_xo}) (*w)(0, 0) = 0.1;
  for (auto* w : {&l.W_hi, &l.W_hf, &l.W_hc, &l.W_ho}) (*w)(0, 0) = 0.1;
  for (auto* w : {&l.w_ci, &l.w_cf, &l.w_co}) (*w)[0] = 0.1;
  p.head.W(0, 0) = 2.0;
  p.head.b[0] = -0.5;

  data::WindowedSample s;
  s.x_recent = nn::Tensor2(3, 2, std::vector<double>{1, 9, -0.5, 9, 2, 9});
  s.external.assign(data::ExternalFeatures::kSize, 0.0);
  double h = 0, cell = 0;
  const deepauto::testing::ScalarLstm scalar{0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0, 0, 0, 0};
  for (double x : {1.0, -0.5, 2.0}) scalar.step(x, h, cell);
  CHECK(h == doctest::Approx(deepauto::testing::frozen("lstm_w01_seq3_h")).epsilon(1e-12));
  const double expect = 1.0 / (1.0 + std::exp(-(2.0 * h - 0.5)));
  CHECK(forward(s, p)[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("micro model gradients match central differences (MMSE and KL)") {
  const auto c = micro_config();
  for (std::uint64_t seed : {1, 2, 3}) {
    auto p = micro_params(c, seed);
    const auto batch = random_batch(c, 4, seed + 10);
    const auto r = deepauto::testing::check_model_gradients(p, batch, {LossKind::mmse, 4.0});
    CHECK(r.coordinates_checked == p.parameter_count());
    CHECK_MESSAGE(r.max_relative_error <= 1e-4, r.worst_parameter);

    auto q = micro_params(c, seed, 4);
    const auto hist = random_batch(c, 4, seed + 20, 4);
    const auto k = deepauto::testing::check_model_gradients(q, hist, {LossKind::kl, 0.0});
    CHECK_MESSAGE(k.max_relative_error <= 1e-4, k.worst_parameter);
  }
}

TEST_CASE("loss properties") {
  const auto c = micro_config();
  auto p = micro_params(c, 5);
  auto batch = random_batch(c, 6, 6);
  for (auto& s : batch) s.target = forward(s, p);
  CHECK(loss_and_gradients_serial(pointers(batch), p, {LossKind::mmse, 4.0}, nullptr) == 0.0);

  // with fixed residuals on targets below 1, doubling alpha lowers the loss
  batch = random_batch(c, 6, 7);
  double prev = std::numeric_limits<double>::infinity();
  for (double alpha : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double l = loss_and_gradients_serial(pointers(batch), p, {LossKind::mmse, alpha}, nullptr);
    CHECK(l < prev);
    prev = l;
  }

  auto q = micro_params(c, 5, 4);
  auto hist = random_batch(c, 6, 8, 4);
  for (auto& s : hist) s.target = forward(s, q);
  CHECK(loss_and_gradients_serial(pointers(hist), q, {LossKind::kl, 0.0}, nullptr) <= 1e-9);
  for (const auto& s : hist) {
    double sum = 0;
    for (double v : forward(s, q)) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("OpenMP kernels are bit-identical across thread counts and close to the serial reference") {
  auto c = micro_config();
  const auto p = micro_params(c, 9);
  const auto batch = random_batch(c, 150, 10);
  const auto ptrs = pointers(batch);
  const LossSpec loss{LossKind::mmse, 4.0};

  auto serial = zeros_like(p);
  const double ls = loss_and_gradients_serial(ptrs, p, loss, &serial);

  const int saved = omp_get_max_threads();
  std::vector<DeepAutoParams> results;
  std::vector<double> losses;
  for (int threads : {1, 2, 4}) {
    omp_set_num_threads(threads);
    BatchGradient kernel;
    auto g = zeros_like(p);
    g.head.b.fill(123.0);  // stale values must be overwritten
    losses.push_back(kernel(ptrs, p, loss, &g));
    results.push_back(g);
  }
  omp_set_num_threads(saved);
  CHECK(results[0] == results[1]);
  CHECK(results[0] == results[2]);
  CHECK(losses[0] == losses[2]);
  CHECK(losses[0] == doctest::Approx(ls).epsilon(1e-12));
  const auto a = results[0].named();
  const auto b = static_cast<const DeepAutoParams&>(serial).named();
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].tensor->size(); ++i)
      CHECK(std::abs((*a[k].tensor)[i] - (*b[k].tensor)[i]) <= 1e-12);

  CHECK(predict_batch(batch, p) == predict_batch_serial(batch, p));
}

TEST_CASE("training: constant target is learned, runs are deterministic") {
  auto c = micro_config();
  c.max_epochs = 50;
  c.patience = 50;
  c.batch_size = 16;
  c.lr = 0.01;
  auto train_set = random_batch(c, 64, 30);
  auto val_set = random_batch(c, 16, 31);
  for (auto* set : {&train_set, &val_set})
    for (auto& s : *set) s.target = {0.3, 0.3};

  const auto a = train(train_set, val_set, c);
  CHECK(a.report.epochs.back().train_loss < 1e-4);
  const auto b = train(train_set, val_set, c);
  CHECK(a.params == b.params);
  for (std::size_t e = 0; e < a.report.epochs.size(); ++e) {
    CHECK(a.report.epochs[e].train_loss == b.report.epochs[e].train_loss);
    CHECK(a.report.epochs[e].val_loss == b.report.epochs[e].val_loss);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : a.report.epochs) best = std::min(best, e.val_loss);
  CHECK(a.report.best_val_loss == best);

  TrainOptions serial;
  serial.serial = true;
  const auto s = train(train_set, val_set, c, serial);
  CHECK(s.report.epochs.size() == a.report.epochs.size());
}

TEST_CASE("training: early stopping at best + patience") {
  auto c = micro_config();
  c.max_epochs = 30;
  c.patience = 2;
  const auto train_set = random_batch(c, 16, 40);
  const auto val_set = random_batch(c, 8, 41);
  TrainOptions opt;
  // improves until epoch 4, then plateaus
  opt.val_override = [](std::size_t epoch, double) { return epoch <= 4 ? 1.0 / static_cast<double>(epoch) : 0.25; };
  const auto r = train(train_set, val_set, c, opt);
  CHECK(r.report.best_epoch == 4);
  CHECK(r.report.epochs.size() == 6);
  CHECK(r.report.stopped_early);
}

TEST_CASE("training: non-finite loss aborts") {
  auto c = micro_config();
  auto train_set = random_batch(c, 8, 50);
  const auto val_set = random_batch(c, 4, 51);
  train_set[3].x_recent(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(train_set, val_set, c), DivergenceError);
  CHECK_THROWS_AS(train({}, val_set, c), DataError);
}

TEST_CASE("model files round-trip and reject corruption") {
  auto c = micro_config();
  ModelBundle bundle{c, micro_params(c, 60), {}};
  bundle.scaler.min = {0.0, 3.0};
  bundle.scaler.max = {1.0, 250.0};
  bundle.scaler.constant = {0, 0};
  const std::string bytes = save_model(bundle);
  CHECK(load_model(bytes) == bundle);
  CHECK(save_model(load_model(bytes)) == bytes);

  auto kind_of = [](const std::string& b) {
    try {
      (void)load_model(b);
    } catch (const FormatError& e) {
      return e.kind();
    }
    FAIL("corruption not detected");
    return FormatError::Kind::bad_content;
  };
  std::string flipped = bytes;
  flipped[bytes.size() - 40] ^= 0x01;  // inside the tensor section
  CHECK(kind_of(flipped) == FormatError::Kind::checksum);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK(kind_of(magic) == FormatError::Kind::bad_magic);
  std::string version = bytes;
  version[4] = 9;
  CHECK(kind_of(version) == FormatError::Kind::bad_version);
  CHECK(kind_of(bytes.substr(0, bytes.size() / 2)) == FormatError::Kind::truncated);
  CHECK(kind_of(bytes.substr(0, 6)) == FormatError::Kind::truncated);
}

TEST_CASE("a model file brings its own shapes") {
  auto c = micro_config();
  c.hidden_r = 8;
  c.use_external = false;
  const ModelBundle bundle{c, DeepAutoParams::initialized(c, 2), {{0, 0}, {1, 1}, {0, 0}}};
  const auto loaded = load_model(save_model(bundle));
  CHECK(loaded.config.hidden_r == 8);
  CHECK(loaded.params.lstm_r->hidden_dim == 8);
  CHECK(loaded.params.ext_net.empty());
}

TEST_CASE("prepare_dataset: ordering, split and scaler fit range") {
  const auto cells = small_cells();
  const auto c = small_config();
  PrepareOptions po;
  po.anchor_stride = 3;
  const auto ds = prepare_dataset(cells, c, po);
  const std::size_t n_cells = cells.series.size();
  const std::size_t total = ds.splits.train.size() + ds.splits.val.size() + ds.splits.test.size();
  CHECK(total == ds.anchors.size() * n_cells);
  CHECK(ds.splits.train.size() == total * 4 / 6);
  CHECK(ds.splits.val.size() == total / 6);
  CHECK(ds.anchors.front() == c.window.lookback());
  for (std::size_t i = 1; i < ds.anchors.size(); ++i) CHECK(ds.anchors[i] - ds.anchors[i - 1] == 3);

  std::vector<const data::WindowedSample*> all;
  for (const auto* part : {&ds.splits.train, &ds.splits.val, &ds.splits.test})
    for (const auto& s : *part) all.push_back(&s);
  for (std::size_t i = 1; i < all.size(); ++i) {
    const bool ordered = all[i - 1]->anchor_t < all[i]->anchor_t ||
                         (all[i - 1]->anchor_t == all[i]->anchor_t && all[i - 1]->cell_index < all[i]->cell_index);
    CHECK(ordered);
  }
  // the scaler ignores rows after fit_rows
  auto changed = cells;
  for (auto& s : changed.series)
    for (std::size_t t = ds.fit_rows; t < s.length(); ++t) s.values(t, 1) = 1e6;
  CHECK(prepare_dataset(changed, c, po).scaler == ds.scaler);
  CHECK(ds.scaler.min[0] == 0.0);
  CHECK(ds.scaler.max[0] == 1.0);

  PrepareOptions given = po;
  given.scaler = data::ScalerParams{{0, 0}, {1, 1000}, {0, 0}};
  CHECK(prepare_dataset(cells, c, given).scaler == *given.scaler);
}

TEST_CASE("prepare_dataset: spatial augmentation appends neighbour channels") {
  const auto cells = small_cells(6, 3);
  auto c = small_config();
  c.window.n_periodic = 0;
  c.spatial_k = 2;
  c.derive_input_dim();
  const auto ds = prepare_dataset(cells, c);
  CHECK(ds.series.front().channel_count() == 6);
  CHECK(ds.neighbors.front().size() == 2);
  CHECK(ds.splits.train.front().x_recent.cols() == 6);
}

TEST_CASE("grid: duplicates agree, failures are isolated, single row matches train") {
  const auto cells = small_cells();
  const auto c = small_config();
  std::vector<GridCandidate> cands{
      {"a", {.n_recent = 4, .n_periodic = 0, .n_seasonal = 0, .period_steps = 96, .season_steps = 672}, false},
      {"broken", {.n_recent = 5, .n_periodic = 1, .n_seasonal = 0, .period_steps = 3, .season_steps = 672}, false},
      {"a_again", {.n_recent = 4, .n_periodic = 0, .n_seasonal = 0, .period_steps = 96, .season_steps = 672}, false},
  };
  const auto rep = grid_search(cells, c, cands);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].metric.has_value());
  CHECK_FALSE(rep.rows[1].metric.has_value());
  CHECK_FALSE(rep.rows[1].error.empty());
  CHECK(rep.rows[1].rank == 0);
  CHECK(rep.rows[0].metric == rep.rows[2].metric);
  CHECK(rep.to_json()["rows"].size() == 3);

  std::vector<GridCandidate> one{cands[0]};
  const auto single = grid_search(cells, c, one, {}, true);
  auto cfg = c;
  cfg.window = cands[0].window;
  cfg.use_external = false;
  const auto ds = prepare_dataset(cells, cfg);
  const auto tr = train(ds.splits.train, ds.splits.val, cfg);
  CHECK(single.rows[0].trained->params == tr.params);
  CHECK(*single.rows[0].metric == validation_metric(ds.splits.val, tr.params, cfg));
}

TEST_CASE("locality ladder shape") {
  const auto l = locality_ladder(96, 672);
  REQUIRE(l.size() == 4);
  CHECK(l[0].window.n_recent == 5);
  CHECK(l[1].window.n_recent == 20);
  CHECK(l[2].window.n_periodic == 1);
  CHECK(l[3].window.n_periodic == 2);
  CHECK(l[3].use_external);
  CHECK_FALSE(l[2].use_external);
}
