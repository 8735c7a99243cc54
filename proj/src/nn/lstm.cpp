// SPDX-License-Identifier: Apache-2.0
#include "deepauto/nn/lstm.hpp"

#include <cmath>

#include "deepauto/error.hpp"
#include "deepauto/nn/activations.hpp"

namespace deepauto::nn {

LstmCellParams LstmCellParams::zeros(std::size_t input_dim, std::size_t hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) throw ShapeError("lstm: input and hidden dims must be positive");
  LstmCellParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  for (Tensor2* w : {&p.W_xi, &p.W_xf, &p.W_xc, &p.W_xo}) w->resize(hidden_dim, input_dim);
  for (Tensor2* w : {&p.W_hi, &p.W_hf, &p.W_hc, &p.W_ho}) w->resize(hidden_dim, hidden_dim);
  for (Tensor2* w : {&p.w_ci, &p.w_cf, &p.w_co, &p.b_i, &p.b_f, &p.b_c, &p.b_o}) w->resize(hidden_dim, 1);
  return p;
}

void LstmCellParams::initialize(Rng& rng) {
  const double bx = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double bh = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (Tensor2* w : {&W_xi, &W_xf, &W_xc, &W_xo})
    for (auto& v : w->values()) v = rng.uniform(-bx, bx);
  for (Tensor2* w : {&W_hi, &W_hf, &W_hc, &W_ho})
    for (auto& v : w->values()) v = rng.uniform(-bh, bh);
  // peepholes see a single cell value each
  for (Tensor2* w : {&w_ci, &w_cf, &w_co})
    for (auto& v : w->values()) v = rng.uniform(-1.0, 1.0);
  b_i.fill(0.0);
  b_f.fill(1.0);
  b_c.fill(0.0);
  b_o.fill(0.0);
}

std::vector<NamedTensor> LstmCellParams::named(const std::string& prefix) {
  return {{prefix + "W_xi", &W_xi}, {prefix + "W_xf", &W_xf}, {prefix + "W_xc", &W_xc}, {prefix + "W_xo", &W_xo},
          {prefix + "W_hi", &W_hi}, {prefix + "W_hf", &W_hf}, {prefix + "W_hc", &W_hc}, {prefix + "W_ho", &W_ho},
          {prefix + "w_ci", &w_ci}, {prefix + "w_cf", &w_cf}, {prefix + "w_co", &w_co}, {prefix + "b_i", &b_i},
          {prefix + "b_f", &b_f},   {prefix + "b_c", &b_c},   {prefix + "b_o", &b_o}};
}

std::vector<ConstNamedTensor> LstmCellParams::named(const std::string& prefix) const {
  std::vector<ConstNamedTensor> out;
  for (auto& nt : const_cast<LstmCellParams*>(this)->named(prefix)) out.push_back({nt.name, nt.tensor});
  return out;
}

std::size_t LstmCellParams::parameter_count() const noexcept {
  return 4 * hidden_dim * (input_dim + hidden_dim) + 3 * hidden_dim + 4 * hidden_dim;
}

void LstmCellParams::validate() const {
  auto expect = [](const Tensor2& t, std::size_t r, std::size_t c, const char* name) {
    if (t.rows() != r || t.cols() != c) {
      throw ShapeError(std::string("lstm param ") + name + " is " + shape_string(t) + ", expected " +
                       std::to_string(r) + "x" + std::to_string(c));
    }
  };
  for (const auto& nt : named()) {
    const char* n = nt.name.c_str();
    if (nt.name.starts_with("W_x")) expect(*nt.tensor, hidden_dim, input_dim, n);
    else if (nt.name.starts_with("W_h")) expect(*nt.tensor, hidden_dim, hidden_dim, n);
    else expect(*nt.tensor, hidden_dim, 1, n);
  }
}

LstmState lstm_cell_forward(std::span<const double> x, const LstmState& prev, const LstmCellParams& p,
                            LstmStepCache* cache) {
  const std::size_t H = p.hidden_dim;
  if (x.size() != p.input_dim) {
    throw ShapeError("lstm: input has " + std::to_string(x.size()) + " values, expected " +
                     std::to_string(p.input_dim));
  }
  if (prev.h.size() != H || prev.c.size() != H) throw ShapeError("lstm: previous state dims mismatch");

  LstmStepCache local;
  LstmStepCache& k = cache ? *cache : local;
  k.x.assign(x.begin(), x.end());
  k.h_prev = prev.h;
  k.c_prev = prev.c;
  k.i.assign(p.b_i.values().begin(), p.b_i.values().end());
  k.f.assign(p.b_f.values().begin(), p.b_f.values().end());
  k.g.assign(p.b_c.values().begin(), p.b_c.values().end());
  k.o.assign(p.b_o.values().begin(), p.b_o.values().end());
  k.c.resize(H);
  k.tanh_c.resize(H);

  matvec_acc(p.W_xi, x, k.i);
  matvec_acc(p.W_hi, prev.h, k.i);
  matvec_acc(p.W_xf, x, k.f);
  matvec_acc(p.W_hf, prev.h, k.f);
  matvec_acc(p.W_xc, x, k.g);
  matvec_acc(p.W_hc, prev.h, k.g);
  matvec_acc(p.W_xo, x, k.o);
  matvec_acc(p.W_ho, prev.h, k.o);

  for (std::size_t j = 0; j < H; ++j) {
    k.i[j] = sigmoid(k.i[j] + p.w_ci[j] * prev.c[j]);
    k.f[j] = sigmoid(k.f[j] + p.w_cf[j] * prev.c[j]);
    k.g[j] = std::tanh(k.g[j]);
    k.c[j] = k.f[j] * prev.c[j] + k.i[j] * k.g[j];
    k.o[j] = sigmoid(k.o[j] + p.w_co[j] * k.c[j]);
    k.tanh_c[j] = std::tanh(k.c[j]);
  }

  LstmState next{Vector(H), k.c};
  for (std::size_t j = 0; j < H; ++j) next.h[j] = k.o[j] * k.tanh_c[j];
  return next;
}

LstmState lstm_forward_sequence(const Tensor2& xs, const LstmCellParams& p, std::vector<LstmStepCache>& caches,
                                const LstmState* init) {
  if (xs.rows() == 0) throw ShapeError("lstm: empty input sequence");
  if (xs.cols() != p.input_dim) {
    throw ShapeError("lstm: sequence width " + std::to_string(xs.cols()) + " does not match input_dim " +
                     std::to_string(p.input_dim));
  }
  caches.resize(xs.rows());
  LstmState state = init ? *init : LstmState::zeros(p.hidden_dim);
  for (std::size_t t = 0; t < xs.rows(); ++t) state = lstm_cell_forward(xs.row(t), state, p, &caches[t]);
  return state;
}

LstmState lstm_forward_sequence(const Tensor2& xs, const LstmCellParams& p, const LstmState* init) {
  if (xs.rows() == 0) throw ShapeError("lstm: empty input sequence");
  LstmState state = init ? *init : LstmState::zeros(p.hidden_dim);
  for (std::size_t t = 0; t < xs.rows(); ++t) state = lstm_cell_forward(xs.row(t), state, p);
  return state;
}

void lstm_backward_sequence(const std::vector<LstmStepCache>& caches, std::span<const double> dh_final,
                            const LstmCellParams& p, LstmCellParams& grads, Tensor2* dxs) {
  const std::size_t H = p.hidden_dim;
  const std::size_t I = p.input_dim;
  if (caches.empty()) throw ShapeError("lstm backward: no cached steps");
  if (dh_final.size() != H) throw ShapeError("lstm backward: upstream gradient has wrong length");
  if (grads.hidden_dim != H || grads.input_dim != I) throw ShapeError("lstm backward: gradient bundle shape mismatch");
  for (const auto& k : caches) {
    if (k.x.size() != I || k.c.size() != H) throw ShapeError("lstm backward: cache does not match parameters");
  }
  if (dxs) dxs->resize(caches.size(), I);

  Vector dh(dh_final.begin(), dh_final.end());
  Vector dc_next(H, 0.0);
  Vector da_i(H), da_f(H), dz(H), da_o(H), dh_prev(H), dc_prev(H);

  for (std::size_t step = caches.size(); step-- > 0;) {
    const LstmStepCache& k = caches[step];
    for (std::size_t j = 0; j < H; ++j) {
      const double d_o = dh[j] * k.tanh_c[j];
      da_o[j] = d_o * k.o[j] * (1.0 - k.o[j]);
      const double dc = dc_next[j] + dh[j] * k.o[j] * (1.0 - k.tanh_c[j] * k.tanh_c[j]) + da_o[j] * p.w_co[j];
      da_f[j] = dc * k.c_prev[j] * k.f[j] * (1.0 - k.f[j]);
      da_i[j] = dc * k.g[j] * k.i[j] * (1.0 - k.i[j]);
      dz[j] = dc * k.i[j] * (1.0 - k.g[j] * k.g[j]);
      dc_prev[j] = dc * k.f[j] + da_i[j] * p.w_ci[j] + da_f[j] * p.w_cf[j];

      grads.w_ci[j] += da_i[j] * k.c_prev[j];
      grads.w_cf[j] += da_f[j] * k.c_prev[j];
      grads.w_co[j] += da_o[j] * k.c[j];
      grads.b_i[j] += da_i[j];
      grads.b_f[j] += da_f[j];
      grads.b_c[j] += dz[j];
      grads.b_o[j] += da_o[j];
    }
    outer_acc(grads.W_xi, da_i, k.x);
    outer_acc(grads.W_xf, da_f, k.x);
    outer_acc(grads.W_xc, dz, k.x);
    outer_acc(grads.W_xo, da_o, k.x);
    outer_acc(grads.W_hi, da_i, k.h_prev);
    outer_acc(grads.W_hf, da_f, k.h_prev);
    outer_acc(grads.W_hc, dz, k.h_prev);
    outer_acc(grads.W_ho, da_o, k.h_prev);

    if (dxs) {
      auto dx = dxs->row(step);
      matvec_transposed_acc(p.W_xi, da_i, dx);
      matvec_transposed_acc(p.W_xf, da_f, dx);
      matvec_transposed_acc(p.W_xc, dz, dx);
      matvec_transposed_acc(p.W_xo, da_o, dx);
    }
    std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
    matvec_transposed_acc(p.W_hi, da_i, dh_prev);
    matvec_transposed_acc(p.W_hf, da_f, dh_prev);
    matvec_transposed_acc(p.W_hc, dz, dh_prev);
    matvec_transposed_acc(p.W_ho, da_o, dh_prev);

    dh.swap(dh_prev);
    dc_next.swap(dc_prev);
  }
}

}  // namespace deepauto::nn
