// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "deepauto/nn/tensor.hpp"

namespace deepauto::nn {

/// Floor applied to predicted histogram bins before renormalising.
inline constexpr double kKlFloor = 1e-8;

/// Load-weighted squared error:
///   L = 1/(K n) sum_ij exp(-alpha (1 - y_ij)) (y_ij - yhat_ij)^2
/// Rows are examples, columns are output dimensions.
double mmse_loss(const Tensor2& y, const Tensor2& y_hat, double alpha);

/// dL/dyhat for mmse_loss.
Tensor2 mmse_gradient(const Tensor2& y, const Tensor2& y_hat, double alpha);

/// Plain mean squared error over all entries.
double mse(const Tensor2& y, const Tensor2& y_hat);

/// Mean over rows of D(P_i || Q_i). Predicted rows are floored at kKlFloor
/// and renormalised; 0 log 0 counts as 0.
double kl_loss(const Tensor2& p, const Tensor2& q);

/// dL/dQ for kl_loss, taken through the floor and the renormalisation.
Tensor2 kl_gradient(const Tensor2& p, const Tensor2& q);

/// dL/d(logits) where Q = softmax(logits) row-wise.
Tensor2 kl_gradient_logits(const Tensor2& p, const Tensor2& logits);

/// Validates that every row is a probability vector (entries >= 0, sum 1
/// within 1e-9); throws DataError otherwise.
void require_histogram_rows(const Tensor2& m, const char* what);

}  // namespace deepauto::nn
