// SPDX-License-Identifier: Apache-2.0
#include "deepauto/model/grid.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "deepauto/error.hpp"
#include "deepauto/eval/metrics.hpp"
#include "deepauto/log.hpp"

namespace deepauto::model {

std::vector<GridCandidate> locality_ladder(std::size_t period_steps, std::size_t season_steps) {
  auto w = [&](std::size_t r, std::size_t p) {
    return data::WindowSpec{
        .n_recent = r, .n_periodic = p, .n_seasonal = 0, .period_steps = period_steps, .season_steps = season_steps};
  };
  return {{"recent_5", w(5, 0), false},
          {"recent_20", w(20, 0), false},
          {"recent_20_periodic_1", w(20, 1), false},
          {"recent_20_periodic_2_external", w(20, 2), true}};
}

double validation_metric(std::span<const data::WindowedSample> val, const DeepAutoParams& params,
                         const DeepAutoConfig& config) {
  const nn::Tensor2 pred = predict_batch(val, params);
  if (config.output.kind == OutputSpec::Kind::pdf) {
    nn::Tensor2 p(val.size(), pred.cols());
    for (std::size_t i = 0; i < val.size(); ++i) std::copy(val[i].target.begin(), val[i].target.end(), p.row(i).begin());
    return eval::kl_eval(p, pred);
  }
  std::vector<double> y, yhat;
  for (std::size_t i = 0; i < val.size(); ++i) {
    y.push_back(val[i].target[0]);
    yhat.push_back(pred(i, 0));
  }
  return eval::rmse(y, yhat);
}

nlohmann::json GridReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& w = r.candidate.window;
    nlohmann::json j{{"label", r.candidate.label},
                     {"n_r", w.n_recent},
                     {"n_p", w.n_periodic},
                     {"n_s", w.n_seasonal},
                     {"external", r.candidate.use_external},
                     {metric_name, r.metric ? nlohmann::json(*r.metric) : nlohmann::json(nullptr)},
                     {"rank", r.rank},
                     {"parameters", r.parameter_count},
                     {"best_epoch", r.best_epoch},
                     {"epochs", r.epochs_run},
                     {"seconds", r.seconds}};
    if (!r.error.empty()) j["error"] = r.error;
    rows_j.push_back(std::move(j));
  }
  return {{"metric", metric_name}, {"rows", rows_j}};
}

std::string GridReport::to_table() const {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-32s %4s %4s %4s %4s %12s %5s\n", "candidate", "n_r", "n_p", "n_s", "ext",
                metric_name.c_str(), "rank");
  out += line;
  for (const auto& r : rows) {
    const auto& w = r.candidate.window;
    char metric[32] = "failed";
    if (r.metric) std::snprintf(metric, sizeof metric, "%.6f", *r.metric);
    std::snprintf(line, sizeof line, "%-32s %4zu %4zu %4zu %4s %12s %5zu\n", r.candidate.label.c_str(), w.n_recent,
                  w.n_periodic, w.n_seasonal, r.candidate.use_external ? "yes" : "no", metric, r.rank);
    out += line;
  }
  return out;
}

GridReport grid_search(const CellSeriesSet& cells, const DeepAutoConfig& base,
                       std::span<const GridCandidate> candidates, const PrepareOptions& options,
                       bool keep_models) {
  if (candidates.empty()) throw ConfigError("grid_search: no candidates");
  GridReport report;
  report.metric_name = base.output.kind == OutputSpec::Kind::pdf ? "val_kl" : "val_rmse";

  PrepareOptions shared = options;
  for (const auto& c : candidates) shared.min_anchor = std::max(shared.min_anchor, c.window.lookback());

  for (const auto& cand : candidates) {
    GridRow row;
    row.candidate = cand;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      DeepAutoConfig cfg = base;
      cfg.window = cand.window;
      cfg.use_external = cand.use_external;
      const PreparedDataset ds = prepare_dataset(cells, cfg, shared);
      auto tr = std::make_shared<TrainResult>(train(ds.splits.train, ds.splits.val, cfg));
      row.metric = validation_metric(ds.splits.val, tr->params, cfg);
      row.parameter_count = tr->params.parameter_count();
      row.best_epoch = tr->report.best_epoch;
      row.epochs_run = tr->report.epochs.size();
      if (keep_models) row.trained = std::move(tr);
    } catch (const std::exception& e) {
      row.error = e.what();
      log::error("grid_candidate_failed", {{"candidate", cand.label}, {"error", e.what()}});
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log::info("grid_candidate", {{"candidate", cand.label},
                                 {"metric", row.metric ? nlohmann::json(*row.metric) : nlohmann::json(nullptr)},
                                 {"seconds", row.seconds}});
    report.rows.push_back(std::move(row));
  }

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    if (report.rows[i].metric) ok.push_back(i);
  std::stable_sort(ok.begin(), ok.end(),
                   [&](std::size_t a, std::size_t b) { return *report.rows[a].metric < *report.rows[b].metric; });
  for (std::size_t r = 0; r < ok.size(); ++r) report.rows[ok[r]].rank = r + 1;
  return report;
}

}  // namespace deepauto::model
