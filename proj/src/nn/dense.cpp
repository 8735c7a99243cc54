// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/dense.hpp"

#include <cmath>

#include "deepauto/error.hpp"

namespace deepauto::nn {

DenseParams DenseParams::zeros(std::size_t in_dim, std::size_t out_dim, Activation act) {
  if (in_dim == 0 || out_dim == 0) throw ShapeError("dense: dims must be positive");
  DenseParams p;
  p.W.resize(out_dim, in_dim);
  p.b.resize(out_dim, 1);
  p.activation = act;
  return p;
}

void DenseParams::initialize(Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim()));
  for (auto& v : W.values()) v = rng.uniform(-bound, bound);
  b.fill(0.0);
}

std::vector<NamedTensor> DenseParams::named(const std::string& prefix) {
  return {{prefix + "W", &W}, {prefix + "b", &b}};
}

std::vector<ConstNamedTensor> DenseParams::named(const std::string& prefix) const {
  return {{prefix + "W", &W}, {prefix + "b", &b}};
}

Vector dense_forward(std::span<const double> x, const DenseParams& p, DenseCache* cache) {
  if (x.size() != p.in_dim()) {
    throw ShapeError("dense: input has " + std::to_string(x.size()) + " values, layer expects " +
                     std::to_string(p.in_dim()));
  }
  Vector out(p.b.values().begin(), p.b.values().end());
  matvec_acc(p.W, x, out);
  apply_activation(p.activation, out);
  if (cache) {
    cache->x.assign(x.begin(), x.end());
    cache->out = out;
  }
  return out;
}

void dense_backward(const DenseCache& cache, std::span<const double> dout, const DenseParams& p, DenseParams& grads,
                    Vector* dx) {
  if (dout.size() != p.out_dim() || cache.out.size() != p.out_dim() || cache.x.size() != p.in_dim()) {
    throw ShapeError("dense backward: cache or upstream gradient does not match layer");
  }
  if (!grads.W.same_shape(p.W) || !grads.b.same_shape(p.b)) throw ShapeError("dense backward: gradient shape mismatch");
  Vector dpre(dout.begin(), dout.end());
  activation_backward(p.activation, cache.out, dpre);
  outer_acc(grads.W, dpre, cache.x);
  for (std::size_t r = 0; r < dpre.size(); ++r) grads.b[r] += dpre[r];
  if (dx) {
    dx->assign(p.in_dim(), 0.0);
    matvec_transposed_acc(p.W, dpre, *dx);
  }
}

}  // namespace deepauto::nn
