#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ymir/core/timeseries.hpp"
#include "ymir/tensor.hpp"

namespace ymir::detectors {

struct VaeParams {
  std::size_t window = 16;
  std::size_t hidden = 32;
  std::size_t latent = 4;
  std::size_t epochs = 50;
  std::size_t batch = 32;
  double learning_rate = 1e-3;
};

/// KL(N(μ, σ²) ‖ N(0, 1)) summed over latent dimensions.
double gaussian_kl(std::span<const double> mu, std::span<const double> logvar);

/// Dense VAE on flattened windows: encoder affine→tanh→(μ, logσ²), decoder
/// affine→tanh→affine. Tensor order: enc_w, enc_b, mu_w, mu_b, logvar_w,
/// logvar_b, dec_w, dec_b, out_w, out_b (weights stored out×in).
class VaeNetwork {
 public:
  enum : std::size_t { kEncW, kEncB, kMuW, kMuB, kLogvarW, kLogvarB, kDecW, kDecB, kOutW, kOutB };

  VaeNetwork() = default;
  VaeNetwork(std::size_t input, std::size_t hidden, std::size_t latent);

  /// Xavier-uniform weights, zero biases.
  void initialize(std::uint64_t seed);

  std::size_t input_size() const { return input_; }
  std::size_t latent_size() const { return latent_; }

  /// Mean over the batch of [mean squared reconstruction error + KL], with
  /// z = μ + exp(logσ²/2)·noise (noise is batch×latent). Accumulates the
  /// gradient into `grad` when given.
  double batch_loss(std::span<const std::vector<double>> inputs, const Matrix& noise,
                    ParamSet* grad) const;

  /// Mean squared reconstruction error through the deterministic z = μ pass.
  double reconstruction_error(std::span<const double> input) const;

  ParamSet params;

 private:
  std::size_t input_ = 0;
  std::size_t hidden_ = 0;
  std::size_t latent_ = 0;
};

/// Fitted window VAE over a multivariate series.
class VaeModel {
 public:
  /// Throws SizeError when window > T.
  static VaeModel fit(const TimeSeriesSet& train, const VaeParams& params, std::uint64_t seed);

  /// Reconstruction error of the window starting at `start`.
  double window_error(const TimeSeriesSet& ts, std::size_t start) const;
  /// Per-timestamp mean over all windows that cover it, for [begin, end).
  std::vector<double> score_range(const TimeSeriesSet& ts, std::size_t begin, std::size_t end) const;

  const VaeParams& hyper() const { return params_; }
  const VaeNetwork& network() const { return net_; }
  const std::vector<double>& loss_history() const { return losses_; }

  nlohmann::json to_json() const;
  static VaeModel from_json(const nlohmann::json& j, std::size_t metric_count);

 private:
  std::vector<double> flatten(const TimeSeriesSet& ts, std::size_t start) const;

  VaeParams params_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  VaeNetwork net_;
  std::vector<double> losses_;
};

}  // namespace ymir::detectors
