// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "deepauto/data/series.hpp"

namespace deepauto::data {

/// Per-channel min-max feature scaling to [0, 1].
struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;
  std::vector<std::uint8_t> constant;  // 1 where max == min; such channels map to 0

  std::size_t channels() const noexcept { return min.size(); }
  bool any_constant() const noexcept;
  bool operator==(const ScalerParams&) const = default;
};

/// Fits on the rows of `m` (rows = time, cols = channels).
ScalerParams fit_scaler(const nn::Tensor2& m);

/// Fits on rows [0, row_end) of every series. Channels with a fixed range
/// (e.g. load, already a fraction) skip fitting and use that range.
ScalerParams fit_scaler(std::span<const KpiSeries> cells, std::size_t row_end,
                        const std::vector<std::optional<std::pair<double, double>>>& fixed = {});

/// (x - min) / (max - min), clamped to [0, 1].
double apply_scaler(const ScalerParams& s, std::size_t channel, double x) noexcept;
double invert_scaler(const ScalerParams& s, std::size_t channel, double x) noexcept;

void apply_scaler(const ScalerParams& s, KpiSeries& series);
void apply_scaler(const ScalerParams& s, nn::Tensor2& m);
void invert_scaler(const ScalerParams& s, nn::Tensor2& m);

}  // namespace deepauto::data
