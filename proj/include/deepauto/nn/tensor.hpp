// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace deepauto::nn {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. Vectors held as parameters use a
/// single column.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor2 column(std::span<const double> v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  void fill(double v);
  void resize(std::size_t rows, std::size_t cols, double fill = 0.0);
  bool same_shape(const Tensor2& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const noexcept;

  bool operator==(const Tensor2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(const Tensor2& t);

/// Fixed-order dot product with four partial sums.
double dot(const double* a, const double* b, std::size_t n) noexcept;

/// y += W x
void matvec_acc(const Tensor2& w, std::span<const double> x, std::span<double> y);
/// dx += W^T dy
void matvec_transposed_acc(const Tensor2& w, std::span<const double> dy, std::span<double> dx);
/// g += dy x^T
void outer_acc(Tensor2& g, std::span<const double> dy, std::span<const double> x);

/// Named reference to a parameter tensor, used by optimizers and serializers.
struct NamedTensor {
  std::string name;
  Tensor2* tensor;
};
struct ConstNamedTensor {
  std::string name;
  const Tensor2* tensor;
};

}  // namespace deepauto::nn
