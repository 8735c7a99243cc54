// SPDX-License-Identifier: Apache-2.0
#include "deepauto/model/network.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "deepauto/error.hpp"
#include "deepauto/nn/losses.hpp"

namespace deepauto::model {

DeepAutoParams DeepAutoParams::zeros(const DeepAutoConfig& config) {
  config.validate();
  DeepAutoParams p;
  std::size_t fusion = 0;
  if (config.window.n_recent > 0) {
    p.lstm_r = nn::LstmCellParams::zeros(config.input_dim, config.hidden_r);
    fusion += config.hidden_r;
  }
  if (config.window.n_periodic > 0) {
    p.lstm_p = nn::LstmCellParams::zeros(config.input_dim, config.hidden_p);
    fusion += config.hidden_p;
  }
  if (config.window.n_seasonal > 0) {
    p.lstm_s = nn::LstmCellParams::zeros(config.input_dim, config.hidden_s);
    fusion += config.hidden_s;
  }
  if (config.use_external) {
    p.ext_net.push_back(
        nn::DenseParams::zeros(data::ExternalFeatures::kSize, config.ext_embed_dim, nn::Activation::tanh));
    fusion += config.ext_embed_dim;
  }
  const bool pdf = config.output.kind == OutputSpec::Kind::pdf;
  p.head = nn::DenseParams::zeros(fusion, config.output.dim(), pdf ? nn::Activation::softmax : nn::Activation::sigmoid);
  return p;
}

DeepAutoParams DeepAutoParams::initialized(const DeepAutoConfig& config, std::uint64_t seed) {
  DeepAutoParams p = zeros(config);
  Rng rng(seed);
  for (auto* l : {&p.lstm_r, &p.lstm_p, &p.lstm_s})
    if (*l) (*l)->initialize(rng);
  for (auto& d : p.ext_net) d.initialize(rng);
  p.head.initialize(rng);
  return p;
}

std::size_t DeepAutoParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& nt : named()) n += nt.tensor->size();
  return n;
}

std::vector<nn::NamedTensor> DeepAutoParams::named() {
  std::vector<nn::NamedTensor> out;
  auto append = [&](std::vector<nn::NamedTensor> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (lstm_r) append(lstm_r->named("lstm_r."));
  if (lstm_p) append(lstm_p->named("lstm_p."));
  if (lstm_s) append(lstm_s->named("lstm_s."));
  for (std::size_t k = 0; k < ext_net.size(); ++k) append(ext_net[k].named("ext" + std::to_string(k) + "."));
  append(head.named("head."));
  return out;
}

std::vector<nn::ConstNamedTensor> DeepAutoParams::named() const {
  std::vector<nn::ConstNamedTensor> out;
  for (auto& nt : const_cast<DeepAutoParams*>(this)->named()) out.push_back({nt.name, nt.tensor});
  return out;
}

void DeepAutoParams::set_zero() {
  for (auto& nt : named()) nt.tensor->fill(0.0);
}

void DeepAutoParams::accumulate(const DeepAutoParams& other) {
  auto mine = named();
  auto theirs = other.named();
  if (mine.size() != theirs.size()) throw ShapeError("accumulate: bundles differ in layout");
  for (std::size_t k = 0; k < mine.size(); ++k) {
    if (!mine[k].tensor->same_shape(*theirs[k].tensor)) throw ShapeError("accumulate: shape mismatch at " + mine[k].name);
    auto dst = mine[k].tensor->values();
    auto src = theirs[k].tensor->values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
}

namespace {

void run_branch(const std::optional<nn::LstmCellParams>& lstm, const nn::Tensor2& xs, const char* name,
                std::vector<nn::LstmStepCache>& caches, nn::Vector& h, std::vector<double>& fusion) {
  if (!lstm) {
    if (xs.rows() != 0) throw ShapeError(std::string("sample carries ") + name + " lags but the branch is disabled");
    return;
  }
  if (xs.rows() == 0) throw ShapeError(std::string("sample has no ") + name + " lags for an enabled branch");
  h = nn::lstm_forward_sequence(xs, *lstm, caches).h;
  fusion.insert(fusion.end(), h.begin(), h.end());
}

}  // namespace

nn::Vector forward(const data::WindowedSample& sample, const DeepAutoParams& params, ForwardCache* cache) {
  ForwardCache local;
  ForwardCache& k = cache ? *cache : local;
  std::vector<double> fusion;
  fusion.reserve(params.fusion_dim());
  run_branch(params.lstm_r, sample.x_recent, "recent", k.r, k.h_r, fusion);
  run_branch(params.lstm_p, sample.x_periodic, "periodic", k.p, k.h_p, fusion);
  run_branch(params.lstm_s, sample.x_seasonal, "seasonal", k.s, k.h_s, fusion);
  k.ext.resize(params.ext_net.size());
  if (!params.ext_net.empty()) {
    nn::Vector e = sample.external;
    for (std::size_t l = 0; l < params.ext_net.size(); ++l) e = nn::dense_forward(e, params.ext_net[l], &k.ext[l]);
    fusion.insert(fusion.end(), e.begin(), e.end());
  }
  if (fusion.size() != params.fusion_dim()) {
    throw ShapeError("fusion vector has " + std::to_string(fusion.size()) + " entries, head expects " +
                     std::to_string(params.fusion_dim()));
  }
  return nn::dense_forward(fusion, params.head, &k.head);
}

void backward(const ForwardCache& cache, std::span<const double> dout, const DeepAutoParams& params,
              GradientBundle& grads) {
  nn::Vector dfusion;
  nn::dense_backward(cache.head, dout, params.head, grads.head, &dfusion);
  std::size_t offset = 0;
  auto branch = [&](const std::optional<nn::LstmCellParams>& p, std::optional<nn::LstmCellParams>& g,
                    const std::vector<nn::LstmStepCache>& caches) {
    if (!p) return;
    std::span<const double> dh(dfusion.data() + offset, p->hidden_dim);
    nn::lstm_backward_sequence(caches, dh, *p, *g);
    offset += p->hidden_dim;
  };
  branch(params.lstm_r, grads.lstm_r, cache.r);
  branch(params.lstm_p, grads.lstm_p, cache.p);
  branch(params.lstm_s, grads.lstm_s, cache.s);
  if (!params.ext_net.empty()) {
    nn::Vector de(dfusion.begin() + static_cast<std::ptrdiff_t>(offset), dfusion.end());
    for (std::size_t l = params.ext_net.size(); l-- > 0;) {
      nn::Vector dx;
      nn::dense_backward(cache.ext[l], de, params.ext_net[l], grads.ext_net[l], l > 0 ? &dx : nullptr);
      de.swap(dx);
    }
  }
}

LossKind loss_kind(const DeepAutoConfig& config) noexcept {
  return config.output.kind == OutputSpec::Kind::pdf ? LossKind::kl : LossKind::mmse;
}

namespace {

/// Loss contribution and output gradient of one sample in a batch of n.
double sample_loss(const data::WindowedSample& s, const nn::Vector& out, const LossSpec& loss, std::size_t n,
                   nn::Vector* dout) {
  if (s.target.size() != out.size()) {
    throw ShapeError("sample target has " + std::to_string(s.target.size()) + " values, model outputs " +
                     std::to_string(out.size()));
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (loss.kind == LossKind::mmse) {
    const double K = static_cast<double>(out.size());
    double sum = 0.0;
    if (dout) dout->resize(out.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      const double w = std::exp(-loss.alpha * (1.0 - s.target[j]));
      const double r = s.target[j] - out[j];
      sum += w * r * r;
      if (dout) (*dout)[j] = -2.0 * w * r * inv_n / K;
    }
    return sum * inv_n / K;
  }
  const nn::Tensor2 p(1, s.target.size(), s.target);
  const nn::Tensor2 q(1, out.size(), out);
  if (dout) {
    const nn::Tensor2 g = nn::kl_gradient(p, q);
    dout->assign(g.values().begin(), g.values().end());
    for (auto& v : *dout) v *= inv_n;
  }
  return nn::kl_loss(p, q) * inv_n;
}

}  // namespace

double loss_and_gradients_serial(std::span<const data::WindowedSample* const> batch, const DeepAutoParams& params,
                                 const LossSpec& loss, GradientBundle* grads) {
  if (batch.empty()) throw DataError("loss_and_gradients: empty batch");
  if (grads) grads->set_zero();
  ForwardCache cache;
  nn::Vector dout;
  double total = 0.0;
  for (const auto* s : batch) {
    const nn::Vector out = forward(*s, params, &cache);
    total += sample_loss(*s, out, loss, batch.size(), grads ? &dout : nullptr);
    if (grads) backward(cache, dout, params, *grads);
  }
  return total;
}

double BatchGradient::operator()(std::span<const data::WindowedSample* const> batch, const DeepAutoParams& params,
                                 const LossSpec& loss, GradientBundle* grads) {
  if (batch.empty()) throw DataError("loss_and_gradients: empty batch");
  const std::size_t n = batch.size();
  const auto chunks = static_cast<std::ptrdiff_t>((n + kChunk - 1) / kChunk);
  partial_loss_.assign(static_cast<std::size_t>(chunks), 0.0);
  if (grads) {
    while (partial_.size() < static_cast<std::size_t>(chunks)) partial_.push_back(zeros_like(params));
    for (std::ptrdiff_t c = 0; c < chunks; ++c) partial_[static_cast<std::size_t>(c)].set_zero();
  }

  bool failed = false;
  std::string failure;
#pragma omp parallel
  {
    ForwardCache cache;
    nn::Vector dout;
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
      const std::size_t begin = static_cast<std::size_t>(c) * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      GradientBundle* g = grads ? &partial_[static_cast<std::size_t>(c)] : nullptr;
      double sum = 0.0;
      try {
        for (std::size_t i = begin; i < end; ++i) {
          const nn::Vector out = forward(*batch[i], params, &cache);
          sum += sample_loss(*batch[i], out, loss, n, g ? &dout : nullptr);
          if (g) backward(cache, dout, params, *g);
        }
      } catch (const std::exception& e) {
#pragma omp critical(deepauto_batch_error)
        {
          failed = true;
          failure = e.what();
        }
      }
      partial_loss_[static_cast<std::size_t>(c)] = sum;
    }
  }
  if (failed) throw ShapeError(failure);

  if (grads) grads->set_zero();
  double total = 0.0;
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    total += partial_loss_[static_cast<std::size_t>(c)];
    if (grads) grads->accumulate(partial_[static_cast<std::size_t>(c)]);
  }
  return total;
}

GradientBundle zeros_like(const DeepAutoParams& params) {
  GradientBundle g = params;
  g.set_zero();
  return g;
}

double evaluate_loss(std::span<const data::WindowedSample> samples, const DeepAutoParams& params, const LossSpec& loss) {
  if (samples.empty()) throw DataError("evaluate_loss: no samples");
  const nn::Tensor2 out = predict_batch(samples, params);
  // mean over samples of the per-sample loss, i.e. the loss of one batch holding everything
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = out.row(i);
    total += sample_loss(samples[i], nn::Vector(row.begin(), row.end()), loss, samples.size(), nullptr);
  }
  return total;
}

nn::Tensor2 predict_batch_serial(std::span<const data::WindowedSample> samples, const DeepAutoParams& params) {
  nn::Tensor2 out(samples.size(), params.output_dim());
  ForwardCache cache;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const nn::Vector y = forward(samples[i], params, &cache);
    std::copy(y.begin(), y.end(), out.row(i).begin());
  }
  return out;
}

nn::Tensor2 predict_batch(std::span<const data::WindowedSample> samples, const DeepAutoParams& params) {
  nn::Tensor2 out(samples.size(), params.output_dim());
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  bool failed = false;
  std::string failure;
#pragma omp parallel
  {
    ForwardCache cache;
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        const nn::Vector y = forward(samples[static_cast<std::size_t>(i)], params, &cache);
        std::copy(y.begin(), y.end(), out.row(static_cast<std::size_t>(i)).begin());
      } catch (const std::exception& e) {
#pragma omp critical(deepauto_predict_error)
        {
          failed = true;
          failure = e.what();
        }
      }
    }
  }
  if (failed) throw ShapeError(failure);
  return out;
}

}  // namespace deepauto::model
