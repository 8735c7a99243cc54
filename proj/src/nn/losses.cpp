// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/losses.hpp"

#include <cmath>

#include "deepauto/error.hpp"
#include "deepauto/nn/activations.hpp"

namespace deepauto::nn {
namespace {

void require_same_shape(const Tensor2& a, const Tensor2& b, const char* op) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shapes " + shape_string(a) + " and " + shape_string(b) + " differ");
  }
}

void require_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("mmse: alpha must be finite and >= 0");
}

}  // namespace

double mmse_loss(const Tensor2& y, const Tensor2& y_hat, double alpha) {
  require_same_shape(y, y_hat, "mmse");
  require_alpha(alpha);
  if (y.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - y_hat[i];
    sum += std::exp(-alpha * (1.0 - y[i])) * r * r;
  }
  return sum / static_cast<double>(y.size());
}

Tensor2 mmse_gradient(const Tensor2& y, const Tensor2& y_hat, double alpha) {
  require_same_shape(y, y_hat, "mmse");
  require_alpha(alpha);
  Tensor2 g(y.rows(), y.cols());
  const double scale = y.empty() ? 0.0 : 1.0 / static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    g[i] = -2.0 * std::exp(-alpha * (1.0 - y[i])) * (y[i] - y_hat[i]) * scale;
  }
  return g;
}

double mse(const Tensor2& y, const Tensor2& y_hat) {
  require_same_shape(y, y_hat, "mse");
  if (y.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) sum += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return sum / static_cast<double>(y.size());
}

void require_histogram_rows(const Tensor2& m, const char* what) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double sum = 0.0;
    for (double v : m.row(r)) {
      if (!(v >= 0.0)) throw DataError(std::string(what) + ": negative or non-finite entry in row " + std::to_string(r));
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw DataError(std::string(what) + ": row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

double kl_loss(const Tensor2& p, const Tensor2& q) {
  require_same_shape(p, q, "kl");
  require_histogram_rows(p, "kl target");
  require_histogram_rows(q, "kl prediction");
  if (p.rows() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto pr = p.row(r);
    auto qr = q.row(r);
    double s = 0.0;
    for (double v : qr) s += std::max(v, kKlFloor);
    double d = 0.0;
    for (std::size_t x = 0; x < pr.size(); ++x) {
      if (pr[x] == 0.0) continue;
      const double qq = std::max(qr[x], kKlFloor) / s;
      d += pr[x] * (std::log(pr[x]) - std::log(qq));
    }
    total += d;
  }
  return total / static_cast<double>(p.rows());
}

Tensor2 kl_gradient(const Tensor2& p, const Tensor2& q) {
  require_same_shape(p, q, "kl");
  Tensor2 g(p.rows(), p.cols());
  if (p.rows() == 0) return g;
  const double inv_n = 1.0 / static_cast<double>(p.rows());
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto pr = p.row(r);
    auto qr = q.row(r);
    auto gr = g.row(r);
    double s = 0.0;
    for (double v : qr) s += std::max(v, kKlFloor);
    // dL/dq'' = -p/q''; chain through q'' = q'/s gives (1/s)(g_y - sum_x g_x q''_x)
    // and sum_x g_x q''_x = -sum_x p_x.
    double psum = 0.0;
    for (double v : pr) psum += v;
    for (std::size_t x = 0; x < pr.size(); ++x) {
      const double floored = std::max(qr[x], kKlFloor);
      const double g_x = pr[x] == 0.0 ? 0.0 : -pr[x] * s / floored;
      const double dq_floored = (g_x + psum) / s;
      gr[x] = qr[x] >= kKlFloor ? dq_floored * inv_n : 0.0;
    }
  }
  return g;
}

Tensor2 kl_gradient_logits(const Tensor2& p, const Tensor2& logits) {
  Tensor2 q = logits;
  for (std::size_t r = 0; r < q.rows(); ++r) apply_activation(Activation::softmax, q.row(r));
  Tensor2 g = kl_gradient(p, q);
  for (std::size_t r = 0; r < g.rows(); ++r) activation_backward(Activation::softmax, q.row(r), g.row(r));
  return g;
}

}  // namespace deepauto::nn
