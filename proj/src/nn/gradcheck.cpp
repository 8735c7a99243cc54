// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "deepauto/error.hpp"

namespace deepauto::nn {

GradCheckResult gradient_check(const std::function<double()>& loss, const std::vector<NamedTensor>& params,
                               const std::vector<ConstNamedTensor>& analytic, double eps, double floor) {
  if (params.size() != analytic.size()) throw ShapeError("gradient_check: parameter/gradient lists differ");
  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor2& p = *params[k].tensor;
    const Tensor2& g = *analytic[k].tensor;
    if (!p.same_shape(g)) throw ShapeError("gradient_check: shape mismatch at " + params[k].name);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = loss();
      p[i] = saved - eps;
      const double down = loss();
      p[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double denom = std::max({std::abs(numeric), std::abs(g[i]), floor});
      const double rel = std::abs(numeric - g[i]) / denom;
      ++result.coordinates_checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_parameter = params[k].name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace deepauto::nn
