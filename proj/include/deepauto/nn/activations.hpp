// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <string>

namespace deepauto::nn {

/// Logistic function 1/(1+e^-x), evaluated without overflow for large |x|.
inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

enum class Activation { identity, relu, sigmoid, softmax, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Applies `a` in place. Softmax is taken over the whole span.
void apply_activation(Activation a, std::span<double> v) noexcept;

/// In place: grad <- d(loss)/d(pre-activation), given d(loss)/d(output) in
/// `grad` and the activation output `out`.
void activation_backward(Activation a, std::span<const double> out, std::span<double> grad) noexcept;

}  // namespace deepauto::nn
