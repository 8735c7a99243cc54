// SPDX-License-Identifier: Apache-2.0
#include "deepauto/data/analysis.hpp"

#include <algorithm>
#include <limits>

#include "deepauto/data/records.hpp"
#include "deepauto/data/split.hpp"
#include "deepauto/error.hpp"

namespace deepauto::data {

SplitBounds split_4_1_1(std::size_t n) {
  if (n < 6) throw DataError("split_4_1_1: need at least 6 samples, got " + std::to_string(n));
  SplitBounds b;
  b.total = n;
  b.train_end = 4 * n / 6;
  b.val_end = b.train_end + n / 6;
  return b;
}

std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n <= max_lag) throw DataError("autocorrelation: series length must exceed max_lag");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> d(n);
  double denom = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    d[t] = x[t] - mean;
    denom += d[t] * d[t];
  }
  if (!(denom > 0.0)) throw DataError("autocorrelation: zero-variance series");
  std::vector<double> rho(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) s += d[t] * d[t + k];
    rho[k] = s / denom;
  }
  rho[0] = 1.0;
  return rho;
}

RsrqHistograms rsrq_histogram(std::span<const RsrqReport> reports, std::int64_t bucket_seconds) {
  if (bucket_seconds <= 0) throw ConfigError("rsrq_histogram: bucket_seconds must be positive");
  RsrqHistograms h;
  h.bucket_seconds = bucket_seconds;
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& r : reports) {
    if (r.value < 0 || r.value >= kRsrqBins) {
      ++h.rejected;
      continue;
    }
    const std::int64_t b = bucket_of(r.ts, bucket_seconds);
    lo = std::min(lo, b);
    hi = std::max(hi, b);
  }
  if (lo > hi) return h;
  const std::size_t B = static_cast<std::size_t>(hi - lo + 1);
  h.start_bucket = lo;
  h.pdf.resize(B, kRsrqBins);
  std::vector<std::size_t> counts(B, 0);
  for (const auto& r : reports) {
    if (r.value < 0 || r.value >= kRsrqBins) continue;
    const auto b = static_cast<std::size_t>(bucket_of(r.ts, bucket_seconds) - lo);
    h.pdf(b, static_cast<std::size_t>(r.value)) += 1.0;
    ++counts[b];
  }
  h.missing.assign(B, 0);
  for (std::size_t b = 0; b < B; ++b) {
    if (counts[b] == 0) {
      h.missing[b] = 1;
      continue;
    }
    for (auto& v : h.pdf.row(b)) v /= static_cast<double>(counts[b]);
  }
  return h;
}

}  // namespace deepauto::data
