// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "deepauto/data/windows.hpp"
#include "deepauto/model/config.hpp"
#include "deepauto/nn/dense.hpp"
#include "deepauto/nn/lstm.hpp"

namespace deepauto::model {

/// Weights of the hierarchical model: one LSTM per enabled temporal branch,
/// a one-layer embedding of the external features and the fusion head over
/// [h_r | h_p | h_s | h_ext]. Disabled branches are not instantiated.
struct DeepAutoParams {
  std::optional<nn::LstmCellParams> lstm_r, lstm_p, lstm_s;
  std::vector<nn::DenseParams> ext_net;
  nn::DenseParams head;

  /// All-zero parameters shaped for `config`.
  static DeepAutoParams zeros(const DeepAutoConfig& config);
  /// Seeded initialisation (uniform +-1/sqrt(fan_in), forget bias 1).
  static DeepAutoParams initialized(const DeepAutoConfig& config, std::uint64_t seed);

  std::size_t fusion_dim() const noexcept { return head.in_dim(); }
  std::size_t output_dim() const noexcept { return head.out_dim(); }
  std::size_t parameter_count() const noexcept;

  std::vector<nn::NamedTensor> named();
  std::vector<nn::ConstNamedTensor> named() const;

  void set_zero();
  /// this += other (shape-congruent bundles).
  void accumulate(const DeepAutoParams& other);
  bool operator==(const DeepAutoParams&) const = default;
};

/// Gradients mirror the parameter layout.
using GradientBundle = DeepAutoParams;

GradientBundle zeros_like(const DeepAutoParams& params);

/// Reusable per-sample scratch for the forward/backward pass.
struct ForwardCache {
  std::vector<nn::LstmStepCache> r, p, s;
  nn::Vector h_r, h_p, h_s;
  std::vector<nn::DenseCache> ext;
  nn::DenseCache head;
};

/// Runs the enabled branches, the embedding and the head.
nn::Vector forward(const data::WindowedSample& sample, const DeepAutoParams& params, ForwardCache* cache = nullptr);

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
void backward(const ForwardCache& cache, std::span<const double> dout, const DeepAutoParams& params,
              GradientBundle& grads);

enum class LossKind { mmse, kl };

LossKind loss_kind(const DeepAutoConfig& config) noexcept;

struct LossSpec {
  LossKind kind = LossKind::mmse;
  double alpha = 4.0;
};

/// Mean batch loss; `grads` (if given) is overwritten with its gradient.
/// Computed sample by sample in batch order.
/// This is the serial reference kernel.
double loss_and_gradients_serial(std::span<const data::WindowedSample* const> batch, const DeepAutoParams& params,
                                 const LossSpec& loss, GradientBundle* grads);

/// Batch loss and gradient with OpenMP across samples. The batch is cut
/// into fixed chunks whose partial results are reduced in chunk order, so
/// the result is bit-identical for any thread count.
class BatchGradient {
 public:
  static constexpr std::size_t kChunk = 32;

  double operator()(std::span<const data::WindowedSample* const> batch, const DeepAutoParams& params,
                    const LossSpec& loss, GradientBundle* grads);

 private:
  std::vector<GradientBundle> partial_;
  std::vector<double> partial_loss_;
};

/// Loss only (no gradient) over a sample set, batched like training.
double evaluate_loss(std::span<const data::WindowedSample> samples, const DeepAutoParams& params, const LossSpec& loss);

/// Predictions for many samples, one row per sample.
nn::Tensor2 predict_batch(std::span<const data::WindowedSample> samples, const DeepAutoParams& params);
nn::Tensor2 predict_batch_serial(std::span<const data::WindowedSample> samples, const DeepAutoParams& params);

}  // namespace deepauto::model
