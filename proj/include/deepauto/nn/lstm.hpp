// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "deepauto/nn/tensor.hpp"
#include "deepauto/rng.hpp"

namespace deepauto::nn {

/// Peephole LSTM cell. Peephole weights are diagonal, stored as columns.
///
///   i = sigmoid(W_xi x + W_hi h' + w_ci * c' + b_i)
///   f = sigmoid(W_xf x + W_hf h' + w_cf * c' + b_f)
///   z = W_xc x + W_hc h' + b_c
///   c = f * c' + i * tanh(z)
///   o = sigmoid(W_xo x + W_ho h' + w_co * c + b_o)
///   h = o * tanh(c)
struct LstmCellParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Tensor2 W_xi, W_xf, W_xc, W_xo;  // hidden x input
  Tensor2 W_hi, W_hf, W_hc, W_ho;  // hidden x hidden
  Tensor2 w_ci, w_cf, w_co;        // hidden x 1
  Tensor2 b_i, b_f, b_c, b_o;      // hidden x 1

  static LstmCellParams zeros(std::size_t input_dim, std::size_t hidden_dim);

  /// Uniform in +-1/sqrt(fan_in) for weights, forget bias 1, other biases 0.
  void initialize(Rng& rng);

  std::vector<NamedTensor> named(const std::string& prefix = "");
  std::vector<ConstNamedTensor> named(const std::string& prefix = "") const;

  std::size_t parameter_count() const noexcept;
  /// Throws ShapeError if any tensor disagrees with input_dim/hidden_dim.
  void validate() const;
  bool operator==(const LstmCellParams&) const = default;
};

struct LstmState {
  Vector h;
  Vector c;

  static LstmState zeros(std::size_t hidden_dim) { return {Vector(hidden_dim, 0.0), Vector(hidden_dim, 0.0)}; }
};

/// Everything the backward pass needs from one forward step.
struct LstmStepCache {
  Vector x;
  Vector h_prev, c_prev;
  Vector i, f, g, c, o, tanh_c;  // g = tanh(z)
};

LstmState lstm_cell_forward(std::span<const double> x, const LstmState& prev, const LstmCellParams& p,
                            LstmStepCache* cache = nullptr);

/// Runs the cell over the rows of `xs` (one time step per row). `caches` is
/// resized to the sequence length and reused across calls to avoid
/// reallocating. Returns the final state; the branch output is its `h`.
LstmState lstm_forward_sequence(const Tensor2& xs, const LstmCellParams& p, std::vector<LstmStepCache>& caches,
                                const LstmState* init = nullptr);

/// Convenience overload without caches.
LstmState lstm_forward_sequence(const Tensor2& xs, const LstmCellParams& p, const LstmState* init = nullptr);

/// Backpropagation through time for a loss that depends only on the final
/// hidden state. Parameter gradients are accumulated into `grads` (which
/// must be shaped like `p`); if `dxs` is non-null it receives d(loss)/d(x_t)
/// for every step, one row per step.
void lstm_backward_sequence(const std::vector<LstmStepCache>& caches, std::span<const double> dh_final,
                            const LstmCellParams& p, LstmCellParams& grads, Tensor2* dxs = nullptr);

}  // namespace deepauto::nn
