#pragma once

// Finite-difference gradient checks shared by the unit tests and the
// acceptance binary. Each draw returns the relative error of the analytic
// gradient against central differences over the checked coordinates.

#include <algorithm>
#include <numeric>
#include <vector>

#include "oracles.hpp"
#include "ymir/detectors/vae.hpp"
#include "ymir/rng.hpp"
#include "ymir/supervised/classifier.hpp"
#include "ymir/supervised/linear_baseline.hpp"

namespace gradcheck {

inline std::vector<std::size_t> pick_coords(std::size_t total, std::size_t limit, ymir::Rng& rng) {
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (limit == 0 || limit >= total) return all;
  rng.shuffle(std::span<std::size_t>(all));
  all.resize(limit);
  std::sort(all.begin(), all.end());
  return all;
}

inline ymir::Matrix random_matrix(std::size_t r, std::size_t c, ymir::Rng& rng) {
  ymir::Matrix m(r, c);
  for (auto& v : m.data) v = rng.normal();
  return m;
}

inline double classifier_draw(const ymir::supervised::ClassifierHyper& hyper, std::uint64_t seed,
                              std::size_t max_coords = 0) {
  using ymir::supervised::ClassifierModel;
  ymir::Rng rng(seed);
  ClassifierModel model(hyper, seed);
  for (std::size_t i = 0; i < model.params.total_size(); ++i) model.params.flat(i) = rng.uniform(-0.5, 0.5);
  // Layer-norm gains around 1 keep activations in a realistic range.
  for (std::size_t enc : {ClassifierModel::kRawEncoder, ClassifierModel::kFeatEncoder}) {
    for (std::size_t g : {ClassifierModel::kLn1G, ClassifierModel::kLn2G}) {
      for (auto& v : model.params[enc + g].values) v += 1.0;
    }
  }
  const auto raw = random_matrix(hyper.window, hyper.metric_count, rng);
  ymir::Matrix feat(hyper.window, hyper.model_count);
  for (auto& v : feat.data) v = rng.uniform();
  const double target = rng.uniform();
  const double weight = rng.uniform(0.5, 2.0);

  ymir::ParamSet grad = model.params.zeros_like();
  model.loss_and_gradient(raw, feat, target, weight, &grad);
  const auto coords = pick_coords(model.params.total_size(), max_coords, rng);
  const auto numeric = oracle::numeric_gradient(
      [&] { return model.loss_and_gradient(raw, feat, target, weight, nullptr); },
      [&](std::size_t i) -> double& { return model.params.flat(i); }, coords);
  std::vector<double> analytic;
  for (auto i : coords) analytic.push_back(grad.flat(i));
  return oracle::relative_error(analytic, numeric);
}

/// Small random architecture per seed so every tensor is checked in full.
inline double classifier_random_draw(std::uint64_t seed) {
  ymir::Rng rng(seed ^ 0xabcdefULL);
  ymir::supervised::ClassifierHyper h;
  h.window = 3 + static_cast<std::size_t>(rng.uniform_index(6));
  h.d_model = 2 + static_cast<std::size_t>(rng.uniform_index(5));
  h.channels = 1 + static_cast<std::size_t>(rng.uniform_index(4));
  h.metric_count = 1 + static_cast<std::size_t>(rng.uniform_index(3));
  h.model_count = 1 + static_cast<std::size_t>(rng.uniform_index(3));
  return classifier_draw(h, seed);
}

inline double baseline_draw(std::uint64_t seed) {
  ymir::Rng rng(seed);
  const std::size_t w = 2 + static_cast<std::size_t>(rng.uniform_index(8));
  const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_index(4));
  const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_index(4));
  ymir::supervised::LinearBaseline model(w, n, k);
  for (std::size_t i = 0; i < model.params.total_size(); ++i) model.params.flat(i) = rng.uniform(-1.0, 1.0);
  ymir::supervised::Dataset data;
  data.window = w;
  data.metric_count = n;
  data.model_count = k;
  const std::size_t count = 5 + static_cast<std::size_t>(rng.uniform_index(20));
  for (std::size_t s = 0; s < count; ++s) {
    ymir::supervised::Sample sample;
    sample.raw = random_matrix(w, n, rng);
    sample.features = ymir::Matrix(w, k);
    for (auto& v : sample.features.data) v = rng.uniform();
    sample.target = rng.uniform();
    data.samples.push_back(std::move(sample));
  }
  ymir::ParamSet grad = model.params.zeros_like();
  model.loss_and_gradient(data, &grad);
  const auto coords = pick_coords(model.params.total_size(), 0, rng);
  const auto numeric = oracle::numeric_gradient([&] { return model.loss_and_gradient(data, nullptr); },
                                                [&](std::size_t i) -> double& { return model.params.flat(i); },
                                                coords);
  std::vector<double> analytic;
  for (auto i : coords) analytic.push_back(grad.flat(i));
  return oracle::relative_error(analytic, numeric);
}

inline double vae_draw(std::uint64_t seed) {
  ymir::Rng rng(seed);
  const std::size_t input = 2 + static_cast<std::size_t>(rng.uniform_index(10));
  const std::size_t hidden = 2 + static_cast<std::size_t>(rng.uniform_index(8));
  const std::size_t latent = 1 + static_cast<std::size_t>(rng.uniform_index(4));
  const std::size_t batch = 1 + static_cast<std::size_t>(rng.uniform_index(5));
  ymir::detectors::VaeNetwork net(input, hidden, latent);
  net.initialize(seed);
  for (std::size_t i = 0; i < net.params.total_size(); ++i) net.params.flat(i) = rng.uniform(-0.6, 0.6);
  std::vector<std::vector<double>> inputs(batch, std::vector<double>(input));
  for (auto& row : inputs)
    for (auto& v : row) v = rng.normal();
  const auto noise = random_matrix(batch, latent, rng);
  ymir::ParamSet grad = net.params.zeros_like();
  net.batch_loss(inputs, noise, &grad);
  const auto coords = pick_coords(net.params.total_size(), 0, rng);
  const auto numeric = oracle::numeric_gradient([&] { return net.batch_loss(inputs, noise, nullptr); },
                                                [&](std::size_t i) -> double& { return net.params.flat(i); },
                                                coords);
  std::vector<double> analytic;
  for (auto i : coords) analytic.push_back(grad.flat(i));
  return oracle::relative_error(analytic, numeric);
}

}  // namespace gradcheck
