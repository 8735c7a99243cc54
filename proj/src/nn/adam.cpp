// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/adam.hpp"

#include <cmath>

#include "deepauto/error.hpp"

namespace deepauto::nn {

AdamState adam_init(const std::vector<NamedTensor>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.tensor->rows(), p.tensor->cols());
    s.v.emplace_back(p.tensor->rows(), p.tensor->cols());
  }
  return s;
}

void adam_step(const std::vector<NamedTensor>& params, const std::vector<ConstNamedTensor>& grads, AdamState& state,
               const AdamConfig& config) {
  if (!(config.lr > 0.0)) throw ConfigError("adam: learning rate must be > 0");
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam: parameter, gradient and state lists differ in length");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].tensor->same_shape(*grads[k].tensor) || !params[k].tensor->same_shape(state.m[k])) {
      throw ShapeError("adam: shape mismatch at " + params[k].name);
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor2& p = *params[k].tensor;
    const Tensor2& g = *grads[k].tensor;
    Tensor2& m = state.m[k];
    Tensor2& v = state.v[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

}  // namespace deepauto::nn
