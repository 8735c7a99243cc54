// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "deepauto/nn/tensor.hpp"

namespace deepauto::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t coordinates_checked = 0;
};

/// Compares analytic gradients against central differences
/// (f(theta+eps) - f(theta-eps)) / (2 eps), coordinate by coordinate.
///
/// `loss` is evaluated with the parameters perturbed in place and must read
/// them through the same tensors listed in `params`. Relative error is
/// |a - n| / max(|a|, |n|, floor) so tiny gradients are compared in
/// absolute terms.
GradCheckResult gradient_check(const std::function<double()>& loss, const std::vector<NamedTensor>& params,
                               const std::vector<ConstNamedTensor>& analytic, double eps = 1e-5,
                               double floor = 1e-7);

}  // namespace deepauto::nn
