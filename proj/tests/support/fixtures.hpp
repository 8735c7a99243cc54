// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "deepauto/data/windows.hpp"
#include "deepauto/model/config.hpp"
#include "deepauto/model/network.hpp"
#include "deepauto/nn/gradcheck.hpp"
#include "deepauto/rng.hpp"

namespace deepauto::testing {

/// Small model used by the gradient suites: every width is at most 4,
/// recent/periodic/seasonal sequences of 3/2/1 steps.
inline model::DeepAutoConfig micro_config() {
  model::DeepAutoConfig c = model::default_config(data::Task::load);
  c.window = {.n_recent = 3, .n_periodic = 2, .n_seasonal = 1, .period_steps = 4, .season_steps = 8};
  c.hidden_r = 4;
  c.hidden_p = 3;
  c.hidden_s = 2;
  c.ext_embed_dim = 3;
  c.output.horizons = {1, 2};
  c.batch_size = 8;
  c.derive_input_dim();
  return c;
}

/// Micro parameters; with `pdf_bins` > 0 the head is replaced by a
/// softmax over that many bins.
inline model::DeepAutoParams micro_params(const model::DeepAutoConfig& c, std::uint64_t seed,
                                          std::size_t pdf_bins = 0) {
  auto p = model::DeepAutoParams::initialized(c, seed);
  if (pdf_bins > 0) {
    p.head = nn::DenseParams::zeros(p.fusion_dim(), pdf_bins, nn::Activation::softmax);
    Rng rng(seed + 1);
    p.head.initialize(rng);
  }
  // non-zero biases so their gradients are exercised too
  Rng rng(seed + 2);
  for (auto& nt : p.named())
    if (nt.name.find(".b") != std::string::npos)
      for (auto& v : nt.tensor->values()) v += rng.uniform(-0.3, 0.3);
  return p;
}

inline nn::Tensor2 random_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  nn::Tensor2 t(rows, cols);
  for (auto& v : t.values()) v = rng.uniform();
  return t;
}

/// Random sample shaped for `c`; histogram targets are strictly positive.
inline data::WindowedSample random_sample(const model::DeepAutoConfig& c, Rng& rng, std::size_t pdf_bins = 0) {
  data::WindowedSample s;
  s.x_recent = random_rows(c.window.n_recent, c.input_dim, rng);
  s.x_periodic = random_rows(c.window.n_periodic, c.input_dim, rng);
  s.x_seasonal = random_rows(c.window.n_seasonal, c.input_dim, rng);
  s.external.resize(data::ExternalFeatures::kSize);
  for (auto& v : s.external) v = rng.uniform(-1, 1);
  if (pdf_bins > 0) {
    s.target.resize(pdf_bins);
    double sum = 0;
    for (auto& v : s.target) sum += (v = rng.uniform(0.05, 1.0));
    for (auto& v : s.target) v /= sum;
  } else {
    s.target.resize(c.output.horizons.size());
    for (auto& v : s.target) v = rng.uniform();
  }
  return s;
}

/// Central-difference check of loss_and_gradients_serial on `batch`.
inline nn::GradCheckResult check_model_gradients(model::DeepAutoParams& params,
                                                 const std::vector<data::WindowedSample>& batch,
                                                 const model::LossSpec& loss) {
  std::vector<const data::WindowedSample*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  auto grads = model::zeros_like(params);
  model::loss_and_gradients_serial(ptrs, params, loss, &grads);
  const auto& cgrads = grads;
  return nn::gradient_check([&] { return model::loss_and_gradients_serial(ptrs, params, loss, nullptr); },
                            params.named(), cgrads.named(), 1e-5);
}

}  // namespace deepauto::testing
