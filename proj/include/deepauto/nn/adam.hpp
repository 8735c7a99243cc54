// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "deepauto/nn/tensor.hpp"

namespace deepauto::nn {

struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for a fixed list of parameter tensors.
struct AdamState {
  std::vector<Tensor2> m;
  std::vector<Tensor2> v;
  std::int64_t step = 0;
};

/// Zero moments shaped like `params`.
AdamState adam_init(const std::vector<NamedTensor>& params);

/// One bias-corrected Adam update. `params` and `grads` must list
/// shape-congruent tensors in the same order.
void adam_step(const std::vector<NamedTensor>& params, const std::vector<ConstNamedTensor>& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace deepauto::nn
