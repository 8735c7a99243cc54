// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepauto/data/series.hpp"
#include "deepauto/nn/tensor.hpp"

namespace deepauto::data {

/// Lag layout of one sample. Counts (n_*) are separate from the period
/// lengths so a "two periodic lags" setting means lags 2P and P.
struct WindowSpec {
  std::size_t n_recent = 20;
  std::size_t n_periodic = 0;
  std::size_t n_seasonal = 0;
  std::size_t period_steps = 96;   // one day
  std::size_t season_steps = 672;  // one week

  /// Throws ConfigError when periodic lags would alias the recent window or
  /// the season is shorter than the period.
  void validate() const;
  /// Oldest lag reached by any branch; the first valid anchor.
  std::size_t lookback() const noexcept;
  bool operator==(const WindowSpec&) const = default;
};

/// Calendar and configuration inputs of the embedding network.
struct ExternalFeatures {
  static constexpr std::size_t kSize = 14;

  double day_of_week[7] = {};  // one-hot, Monday = 0
  double hour_sin = 0.0, hour_cos = 1.0;
  double minute_sin = 0.0, minute_cos = 1.0;
  double band = 0.0, power = 0.0, bandwidth = 0.0;

  /// Features for a prediction made at `anchor_ts` with `config` (raw
  /// band MHz, power dBm, bandwidth MHz) in force.
  static ExternalFeatures at(std::int64_t anchor_ts, std::span<const double> config);
  nn::Vector to_vector() const;
};

/// What a sample predicts.
struct TargetSpec {
  enum class Kind { horizons, histogram };

  Kind kind = Kind::horizons;
  std::vector<std::size_t> horizons{1, 15, 60};
  std::size_t channel = 0;  // target channel for horizons
  std::size_t width = 0;    // histogram: channels [0, width)

  std::size_t output_dim() const noexcept { return kind == Kind::horizons ? horizons.size() : width; }
  /// Steps after the anchor the target reaches (inclusive count).
  std::size_t reach() const noexcept;
};

struct WindowedSample {
  std::size_t cell_index = 0;
  std::size_t anchor_t = 0;
  std::int64_t anchor_ts = 0;
  nn::Tensor2 x_recent;    // n_recent x C, oldest first
  nn::Tensor2 x_periodic;  // n_periodic x C, lag n_p*P first
  nn::Tensor2 x_seasonal;  // n_seasonal x C
  nn::Vector external;     // ExternalFeatures::kSize
  nn::Vector target;       // empty for inference past the end of the series
};

/// [mean(y[t .. t+h-1]) for h in horizons] on `channel`.
nn::Vector aggregate_targets(const KpiSeries& series, std::size_t t, std::span<const std::size_t> horizons,
                             std::size_t channel = 0);

/// Builds the sample anchored at `t` (predicting from t onwards using rows
/// < t). Every lag must be >= 0; with `with_target` the target rows must
/// exist. This is the only routine that assembles model inputs, for batch
/// and streaming alike.
WindowedSample build_sample(const KpiSeries& series, std::size_t t, const WindowSpec& spec, const TargetSpec& target,
                            bool with_target, std::size_t cell_index = 0);

struct WindowOptions {
  bool require_targets = true;
  /// Anchors below this are skipped even if their lags fit, so candidates
  /// with different lookbacks can share one anchor set.
  std::size_t min_anchor = 0;
};

struct WindowResult {
  std::vector<WindowedSample> samples;
  std::string diagnostic;  // non-empty when the spec does not fit the series
};

/// All valid anchors of one series in increasing order. Without targets
/// the anchor may equal T (the step after the last observation).
WindowResult make_windows(const KpiSeries& series, const WindowSpec& spec, const TargetSpec& target,
                          const WindowOptions& options = {}, std::size_t cell_index = 0);

/// Range of valid anchors [first, last] or an empty optional.
struct AnchorRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const noexcept { return last - first + 1; }
};
std::optional<AnchorRange> valid_anchors(std::size_t length, const WindowSpec& spec, const TargetSpec& target,
                                         const WindowOptions& options);

}  // namespace deepauto::data
