// SPDX-License-Identifier: Apache-2.0
#include "deepauto/eval/report.hpp"

#include <cstdio>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"

namespace deepauto::eval {

nlohmann::json CompareReport::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_j.push_back({{"algorithm", r.algorithm},
                      {"horizon", r.horizon},
                      {"rmse", r.metrics.rmse},
                      {"mae", r.metrics.mae},
                      {"mape", r.metrics.mape ? nlohmann::json(*r.metrics.mape) : nlohmann::json(nullptr)}});
  }
  nlohmann::json fail_j = nlohmann::json::array();
  for (const auto& f : failures) fail_j.push_back({{"algorithm", f.algorithm}, {"error", f.message}});
  return {{"rows", rows_j}, {"failures", fail_j}, {"mape_threshold", threshold}};
}

std::string CompareReport::to_table() const {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %8s %10s %10s %10s\n", "algorithm", "horizon", "rmse", "mae", "mape");
  out += line;
  for (const auto& r : rows) {
    char mape[32] = "-";
    if (r.metrics.mape) std::snprintf(mape, sizeof mape, "%.3f", *r.metrics.mape);
    std::snprintf(line, sizeof line, "%-16s %8zu %10.5f %10.5f %10s\n", r.algorithm.c_str(), r.horizon,
                  r.metrics.rmse, r.metrics.mae, mape);
    out += line;
  }
  for (const auto& f : failures) out += f.algorithm + ": failed: " + f.message + "\n";
  return out;
}

const CompareRow& CompareReport::find(std::string_view algorithm, std::size_t horizon) const {
  for (const auto& r : rows)
    if (r.algorithm == algorithm && r.horizon == horizon) return r;
  throw Error("no report row for " + std::string(algorithm) + " at horizon " + std::to_string(horizon));
}

CompareReport compare_report(std::span<const Predictor* const> predictors,
                             std::span<const data::WindowedSample> samples, std::span<const std::size_t> horizons,
                             double threshold) {
  if (samples.empty()) throw DataError("compare_report: no samples");
  CompareReport report;
  report.threshold = threshold;
  for (const Predictor* p : predictors) {
    try {
      std::vector<std::vector<double>> y(horizons.size()), yhat(horizons.size());
      for (const auto& s : samples) {
        if (s.target.size() != horizons.size()) throw ShapeError("sample targets do not match the horizon list");
        const auto pred = p->predict(s);
        if (pred.size() != horizons.size()) throw ShapeError("prediction width does not match the horizon list");
        for (std::size_t k = 0; k < horizons.size(); ++k) {
          y[k].push_back(s.target[k]);
          yhat[k].push_back(pred[k]);
        }
      }
      for (std::size_t k = 0; k < horizons.size(); ++k)
        report.rows.push_back({p->name(), horizons[k], compute_metrics(y[k], yhat[k], threshold)});
    } catch (const std::exception& e) {
      log::error("predictor_failed", {{"algorithm", p->name()}, {"error", e.what()}});
      report.failures.push_back({p->name(), e.what()});
    }
  }
  return report;
}

std::vector<KlRow> compare_kl(std::span<const Predictor* const> predictors,
                              std::span<const data::WindowedSample> samples) {
  if (samples.empty()) throw DataError("compare_kl: no samples");
  const std::size_t bins = samples.front().target.size();
  nn::Tensor2 p(samples.size(), bins);
  for (std::size_t i = 0; i < samples.size(); ++i) std::copy_n(samples[i].target.begin(), bins, p.row(i).begin());
  std::vector<KlRow> out;
  for (const Predictor* pred : predictors) {
    nn::Tensor2 q(samples.size(), bins);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto v = pred->predict(samples[i]);
      if (v.size() != bins) throw ShapeError(pred->name() + ": histogram width mismatch");
      std::copy(v.begin(), v.end(), q.row(i).begin());
    }
    out.push_back({pred->name(), kl_eval(p, q)});
  }
  return out;
}

}  // namespace deepauto::eval
