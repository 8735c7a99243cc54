// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/activations.hpp"

#include <algorithm>

#include "deepauto/error.hpp"

namespace deepauto::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::softmax: return "softmax";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "softmax") return Activation::softmax;
  if (name == "tanh") return Activation::tanh;
  throw ConfigError("unknown activation '" + name + "'");
}

void apply_activation(Activation a, std::span<double> v) noexcept {
  switch (a) {
    case Activation::identity:
      return;
    case Activation::relu:
      for (auto& x : v) x = x > 0.0 ? x : 0.0;
      return;
    case Activation::sigmoid:
      for (auto& x : v) x = sigmoid(x);
      return;
    case Activation::tanh:
      for (auto& x : v) x = std::tanh(x);
      return;
    case Activation::softmax: {
      if (v.empty()) return;
      const double m = *std::max_element(v.begin(), v.end());
      double sum = 0.0;
      for (auto& x : v) {
        x = std::exp(x - m);
        sum += x;
      }
      for (auto& x : v) x /= sum;
      return;
    }
  }
}

void activation_backward(Activation a, std::span<const double> out, std::span<double> grad) noexcept {
  switch (a) {
    case Activation::identity:
      return;
    case Activation::relu:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = out[i] > 0.0 ? grad[i] : 0.0;
      return;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= out[i] * (1.0 - out[i]);
      return;
    case Activation::tanh:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - out[i] * out[i];
      return;
    case Activation::softmax: {
      double inner = 0.0;
      for (std::size_t i = 0; i < grad.size(); ++i) inner += grad[i] * out[i];
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = out[i] * (grad[i] - inner);
      return;
    }
  }
}

}  // namespace deepauto::nn
