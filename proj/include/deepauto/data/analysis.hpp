// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "deepauto/nn/tensor.hpp"

namespace deepauto::data {

/// Sample autocorrelation rho(k) for k = 0..max_lag:
///   sum_t (x_t - mean)(x_{t+k} - mean) / sum_t (x_t - mean)^2
/// Throws DataError when the series is constant or not longer than max_lag.
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

/// One RSRQ report: timestamp and integer quality index in [0, 34].
struct RsrqReport {
  std::int64_t ts = 0;
  int value = 0;
};

struct RsrqHistograms {
  std::int64_t start_bucket = 0;
  std::int64_t bucket_seconds = 300;
  nn::Tensor2 pdf;                   // buckets x 35, rows sum to 1 (zeros when missing)
  std::vector<std::uint8_t> missing; // 1 for buckets without reports
  std::size_t rejected = 0;          // reports outside [0, 34]
};

/// Groups reports into buckets of `bucket_seconds` and normalises the bin
/// counts of each bucket. The bucket range spans the first to the last
/// accepted report.
RsrqHistograms rsrq_histogram(std::span<const RsrqReport> reports, std::int64_t bucket_seconds = 300);

}  // namespace deepauto::data
