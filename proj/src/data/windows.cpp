// SPDX-License-Identifier: Apache-2.0
#include "deepauto/data/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "deepauto/error.hpp"

namespace deepauto::data {

void WindowSpec::validate() const {
  if (n_recent == 0 && n_periodic == 0 && n_seasonal == 0) throw ConfigError("window: every branch is disabled");
  if (n_periodic > 0 && period_steps <= n_recent) {
    throw ConfigError("window: period_steps must exceed n_recent when periodic lags are used");
  }
  if (n_seasonal > 0 && season_steps < period_steps) throw ConfigError("window: season_steps must be >= period_steps");
  if ((n_periodic > 0 && period_steps == 0) || (n_seasonal > 0 && season_steps == 0)) {
    throw ConfigError("window: period lengths must be positive");
  }
}

std::size_t WindowSpec::lookback() const noexcept {
  return std::max({n_recent, n_periodic * period_steps, n_seasonal * season_steps});
}

ExternalFeatures ExternalFeatures::at(std::int64_t anchor_ts, std::span<const double> config) {
  ExternalFeatures e;
  constexpr std::int64_t kDay = 86400;
  std::int64_t days = anchor_ts / kDay;
  std::int64_t sec_of_day = anchor_ts % kDay;
  if (sec_of_day < 0) {
    sec_of_day += kDay;
    --days;
  }
  // 1970-01-01 was a Thursday (index 3 with Monday = 0)
  const std::int64_t dow = ((days + 3) % 7 + 7) % 7;
  e.day_of_week[dow] = 1.0;
  const double hour = static_cast<double>(sec_of_day / 3600);
  const double minute = static_cast<double>((sec_of_day / 60) % 60);
  const double two_pi = 2.0 * std::numbers::pi;
  e.hour_sin = std::sin(two_pi * hour / 24.0);
  e.hour_cos = std::cos(two_pi * hour / 24.0);
  e.minute_sin = std::sin(two_pi * minute / 60.0);
  e.minute_cos = std::cos(two_pi * minute / 60.0);
  if (config.size() >= kConfigColumns) {
    e.band = config[0] / 3000.0;
    e.power = config[1] / 50.0;
    e.bandwidth = config[2] / 20.0;
  }
  return e;
}

nn::Vector ExternalFeatures::to_vector() const {
  nn::Vector v(day_of_week, day_of_week + 7);
  v.insert(v.end(), {hour_sin, hour_cos, minute_sin, minute_cos, band, power, bandwidth});
  return v;
}

std::size_t TargetSpec::reach() const noexcept {
  if (kind == Kind::histogram) return 1;
  return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

nn::Vector aggregate_targets(const KpiSeries& series, std::size_t t, std::span<const std::size_t> horizons,
                             std::size_t channel) {
  nn::Vector out;
  out.reserve(horizons.size());
  for (std::size_t h : horizons) {
    if (h == 0) throw ConfigError("aggregate_targets: horizon must be >= 1");
    if (t + h > series.length()) throw DataError("aggregate_targets: horizon beyond series end");
    double sum = 0.0;
    for (std::size_t k = t; k < t + h; ++k) sum += series.values(k, channel);
    out.push_back(sum / static_cast<double>(h));
  }
  return out;
}

namespace {

void copy_rows(const KpiSeries& s, nn::Tensor2& dst, std::size_t count, std::size_t t, std::size_t stride) {
  const std::size_t C = s.channel_count();
  dst.resize(count, C);
  // row 0 is the oldest lag: t - count*stride
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t src = t - (count - k) * stride;
    auto from = s.values.row(src);
    std::copy(from.begin(), from.end(), dst.row(k).begin());
  }
}

}  // namespace

WindowedSample build_sample(const KpiSeries& series, std::size_t t, const WindowSpec& spec, const TargetSpec& target,
                            bool with_target, std::size_t cell_index) {
  if (t < spec.lookback()) throw DataError("build_sample: anchor precedes the window lookback");
  if (t > series.length()) throw DataError("build_sample: anchor beyond series end");
  WindowedSample w;
  w.cell_index = cell_index;
  w.anchor_t = t;
  w.anchor_ts = series.timestamp(t);
  copy_rows(series, w.x_recent, spec.n_recent, t, 1);
  copy_rows(series, w.x_periodic, spec.n_periodic, t, spec.period_steps);
  copy_rows(series, w.x_seasonal, spec.n_seasonal, t, spec.season_steps);
  nn::Vector cfg(kConfigColumns, 0.0);
  if (t > 0 && series.cell_config.rows() == series.length()) {
    auto row = series.cell_config.row(t - 1);
    cfg.assign(row.begin(), row.end());
  }
  w.external = ExternalFeatures::at(w.anchor_ts, cfg).to_vector();
  if (with_target) {
    if (target.kind == TargetSpec::Kind::horizons) {
      w.target = aggregate_targets(series, t, target.horizons, target.channel);
    } else {
      if (t >= series.length()) throw DataError("build_sample: histogram target beyond series end");
      if (target.width > series.channel_count()) throw ShapeError("build_sample: histogram wider than series");
      auto row = series.values.row(t);
      w.target.assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(target.width));
    }
  }
  return w;
}

std::optional<AnchorRange> valid_anchors(std::size_t length, const WindowSpec& spec, const TargetSpec& target,
                                         const WindowOptions& options) {
  const std::size_t first = std::max(spec.lookback(), options.min_anchor);
  std::size_t last;
  if (options.require_targets) {
    const std::size_t reach = target.reach();
    if (reach == 0 || length < reach) return std::nullopt;
    last = length - reach;
  } else {
    last = length;
  }
  if (first > last) return std::nullopt;
  return AnchorRange{first, last};
}

WindowResult make_windows(const KpiSeries& series, const WindowSpec& spec, const TargetSpec& target,
                          const WindowOptions& options, std::size_t cell_index) {
  spec.validate();
  WindowResult result;
  auto range = valid_anchors(series.length(), spec, target, options);
  if (!range) {
    result.diagnostic = "series " + series.cell_id + " of length " + std::to_string(series.length()) +
                        " is too short for lookback " + std::to_string(spec.lookback()) + " and target reach " +
                        std::to_string(target.reach());
    return result;
  }
  result.samples.reserve(range->count());
  for (std::size_t t = range->first; t <= range->last; ++t) {
    result.samples.push_back(build_sample(series, t, spec, target, options.require_targets, cell_index));
  }
  return result;
}

}  // namespace deepauto::data
