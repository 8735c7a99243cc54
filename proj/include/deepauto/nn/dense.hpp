// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "deepauto/nn/activations.hpp"
#include "deepauto/nn/tensor.hpp"
#include "deepauto/rng.hpp"

namespace deepauto::nn {

/// Fully connected layer: act(W x + b).
struct DenseParams {
  Tensor2 W;  // out x in
  Tensor2 b;  // out x 1
  Activation activation = Activation::identity;

  static DenseParams zeros(std::size_t in_dim, std::size_t out_dim, Activation act);
  void initialize(Rng& rng);

  std::size_t in_dim() const noexcept { return W.cols(); }
  std::size_t out_dim() const noexcept { return W.rows(); }

  std::vector<NamedTensor> named(const std::string& prefix = "");
  std::vector<ConstNamedTensor> named(const std::string& prefix = "") const;
  bool operator==(const DenseParams&) const = default;
};

struct DenseCache {
  Vector x;
  Vector out;
};

Vector dense_forward(std::span<const double> x, const DenseParams& p, DenseCache* cache = nullptr);

/// Accumulates parameter gradients into `grads`; writes d(loss)/dx into `dx`
/// when non-null. `dout` is d(loss)/d(output).
void dense_backward(const DenseCache& cache, std::span<const double> dout, const DenseParams& p, DenseParams& grads,
                    Vector* dx = nullptr);

}  // namespace deepauto::nn
