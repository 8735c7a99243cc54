// SPDX-License-Identifier: Apache-2.0
#include "deepauto/data/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"

namespace deepauto::data {
namespace {

void finish(ScalerParams& s) {
  s.constant.assign(s.min.size(), 0);
  for (std::size_t c = 0; c < s.min.size(); ++c) {
    if (!(s.max[c] > s.min[c])) {
      s.constant[c] = 1;
      log::warn("scaler_constant_channel", {{"channel", c}, {"value", s.min[c]}});
    }
  }
}

}  // namespace

bool ScalerParams::any_constant() const noexcept {
  return std::any_of(constant.begin(), constant.end(), [](std::uint8_t v) { return v != 0; });
}

ScalerParams fit_scaler(const nn::Tensor2& m) {
  if (m.rows() == 0) throw DataError("fit_scaler: empty training slice");
  ScalerParams s;
  s.min.assign(m.cols(), std::numeric_limits<double>::infinity());
  s.max.assign(m.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      s.min[c] = std::min(s.min[c], m(r, c));
      s.max[c] = std::max(s.max[c], m(r, c));
    }
  }
  finish(s);
  return s;
}

ScalerParams fit_scaler(std::span<const KpiSeries> cells, std::size_t row_end,
                        const std::vector<std::optional<std::pair<double, double>>>& fixed) {
  if (cells.empty()) throw DataError("fit_scaler: no series");
  const std::size_t C = cells.front().channel_count();
  ScalerParams s;
  s.min.assign(C, std::numeric_limits<double>::infinity());
  s.max.assign(C, -std::numeric_limits<double>::infinity());
  bool any_row = false;
  for (const auto& cell : cells) {
    if (cell.channel_count() != C) throw ShapeError("fit_scaler: series disagree on channel count");
    const std::size_t end = std::min(row_end, cell.length());
    for (std::size_t t = 0; t < end; ++t) {
      any_row = true;
      for (std::size_t c = 0; c < C; ++c) {
        s.min[c] = std::min(s.min[c], cell.values(t, c));
        s.max[c] = std::max(s.max[c], cell.values(t, c));
      }
    }
  }
  if (!any_row) throw DataError("fit_scaler: empty training slice");
  for (std::size_t c = 0; c < C && c < fixed.size(); ++c) {
    if (fixed[c]) {
      s.min[c] = fixed[c]->first;
      s.max[c] = fixed[c]->second;
    }
  }
  finish(s);
  return s;
}

double apply_scaler(const ScalerParams& s, std::size_t channel, double x) noexcept {
  if (s.constant[channel]) return 0.0;
  const double v = (x - s.min[channel]) / (s.max[channel] - s.min[channel]);
  return std::clamp(v, 0.0, 1.0);
}

double invert_scaler(const ScalerParams& s, std::size_t channel, double x) noexcept {
  if (s.constant[channel]) return s.min[channel];
  return s.min[channel] + x * (s.max[channel] - s.min[channel]);
}

void apply_scaler(const ScalerParams& s, KpiSeries& series) {
  apply_scaler(s, series.values);
}

void apply_scaler(const ScalerParams& s, nn::Tensor2& m) {
  if (m.cols() != s.channels()) throw ShapeError("apply_scaler: channel count mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = apply_scaler(s, c, m(r, c));
}

void invert_scaler(const ScalerParams& s, nn::Tensor2& m) {
  if (m.cols() != s.channels()) throw ShapeError("invert_scaler: channel count mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = invert_scaler(s, c, m(r, c));
}

}  // namespace deepauto::data
