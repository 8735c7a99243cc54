// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "deepauto/error.hpp"

namespace deepauto::nn {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Tensor2 Tensor2::column(std::span<const double> v) {
  return Tensor2(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

void Tensor2::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor2::resize(std::size_t rows, std::size_t cols, double fill) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, fill);
}

bool Tensor2::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Tensor2& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

void matvec_acc(const Tensor2& w, std::span<const double> x, std::span<double> y) {
  if (w.cols() != x.size() || w.rows() != y.size()) {
    throw ShapeError("matvec: W is " + shape_string(w) + ", x has " + std::to_string(x.size()) +
                     ", y has " + std::to_string(y.size()));
  }
  const std::size_t n = w.cols();
  for (std::size_t r = 0; r < w.rows(); ++r) y[r] += dot(w.data() + r * n, x.data(), n);
}

void matvec_transposed_acc(const Tensor2& w, std::span<const double> dy, std::span<double> dx) {
  if (w.rows() != dy.size() || w.cols() != dx.size()) {
    throw ShapeError("matvec^T: W is " + shape_string(w) + ", dy has " + std::to_string(dy.size()) +
                     ", dx has " + std::to_string(dx.size()));
  }
  const std::size_t n = w.cols();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* row = w.data() + r * n;
    for (std::size_t c = 0; c < n; ++c) dx[c] += row[c] * g;
  }
}

void outer_acc(Tensor2& g, std::span<const double> dy, std::span<const double> x) {
  if (g.rows() != dy.size() || g.cols() != x.size()) {
    throw ShapeError("outer: G is " + shape_string(g) + ", dy has " + std::to_string(dy.size()) +
                     ", x has " + std::to_string(x.size()));
  }
  const std::size_t n = g.cols();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const double d = dy[r];
    if (d == 0.0) continue;
    double* row = g.data() + r * n;
    for (std::size_t c = 0; c < n; ++c) row[c] += d * x[c];
  }
}

}  // namespace deepauto::nn
