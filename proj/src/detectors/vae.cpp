#include "ymir/detectors/vae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ymir/error.hpp"
#include "ymir/rng.hpp"

namespace ymir::detectors {
namespace {

// out = W·x + b with W stored out×in.
void affine(const Tensor& w, const Tensor& b, std::span<const double> x, std::span<double> out) {
  const std::size_t in = x.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = b.values[i];
    const double* row = w.values.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
}

// Accumulates dW += dy·xᵀ, db += dy and, when dx is non-empty, dx = Wᵀ·dy.
void affine_backward(const Tensor& w, std::span<const double> x, std::span<const double> dy,
                     Tensor& dw, Tensor& db, std::span<double> dx) {
  const std::size_t in = x.size();
  std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t i = 0; i < dy.size(); ++i) {
    const double g = dy[i];
    db.values[i] += g;
    double* grow = dw.values.data() + i * in;
    const double* row = w.values.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) {
      grow[j] += g * x[j];
      if (!dx.empty()) dx[j] += row[j] * g;
    }
  }
}

void xavier(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.values) v = rng.uniform(-r, r);
}

}  // namespace

double gaussian_kl(std::span<const double> mu, std::span<const double> logvar) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    acc += 1.0 + logvar[i] - mu[i] * mu[i] - std::exp(logvar[i]);
  }
  return -0.5 * acc;
}

VaeNetwork::VaeNetwork(std::size_t input, std::size_t hidden, std::size_t latent)
    : input_(input), hidden_(hidden), latent_(latent) {
  params.tensors = {
      Tensor::zeros("enc_w", {hidden, input}),   Tensor::zeros("enc_b", {hidden}),
      Tensor::zeros("mu_w", {latent, hidden}),   Tensor::zeros("mu_b", {latent}),
      Tensor::zeros("logvar_w", {latent, hidden}), Tensor::zeros("logvar_b", {latent}),
      Tensor::zeros("dec_w", {hidden, latent}),  Tensor::zeros("dec_b", {hidden}),
      Tensor::zeros("out_w", {input, hidden}),   Tensor::zeros("out_b", {input}),
  };
}

void VaeNetwork::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& t : params.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
  xavier(params[kEncW], input_, hidden_, rng);
  xavier(params[kMuW], hidden_, latent_, rng);
  xavier(params[kLogvarW], hidden_, latent_, rng);
  xavier(params[kDecW], latent_, hidden_, rng);
  xavier(params[kOutW], hidden_, input_, rng);
}

double VaeNetwork::batch_loss(std::span<const std::vector<double>> inputs, const Matrix& noise,
                              ParamSet* grad) const {
  const std::size_t B = inputs.size();
  if (B == 0) throw SizeError("empty VAE batch");
  const double inv_b = 1.0 / static_cast<double>(B);
  const double inv_d = 1.0 / static_cast<double>(input_);
  const auto& p = params;

  std::vector<double> h1(hidden_), mu(latent_), lv(latent_), z(latent_), h2(hidden_), out(input_);
  std::vector<double> d_out(input_), d_h2(hidden_), d_z(latent_), d_mu(latent_), d_lv(latent_);
  std::vector<double> d_h1(hidden_), tmp(hidden_), none;

  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& x = inputs[b];
    affine(p[kEncW], p[kEncB], x, h1);
    for (auto& v : h1) v = std::tanh(v);
    affine(p[kMuW], p[kMuB], h1, mu);
    affine(p[kLogvarW], p[kLogvarB], h1, lv);
    for (std::size_t i = 0; i < latent_; ++i) z[i] = mu[i] + std::exp(0.5 * lv[i]) * noise(b, i);
    affine(p[kDecW], p[kDecB], z, h2);
    for (auto& v : h2) v = std::tanh(v);
    affine(p[kOutW], p[kOutB], h2, out);

    double sq = 0.0;
    for (std::size_t i = 0; i < input_; ++i) sq += (out[i] - x[i]) * (out[i] - x[i]);
    total += sq * inv_d + gaussian_kl(mu, lv);
    if (grad == nullptr) continue;

    auto& g = *grad;
    for (std::size_t i = 0; i < input_; ++i) d_out[i] = 2.0 * (out[i] - x[i]) * inv_d * inv_b;
    affine_backward(p[kOutW], h2, d_out, g[kOutW], g[kOutB], d_h2);
    for (std::size_t i = 0; i < hidden_; ++i) tmp[i] = d_h2[i] * (1.0 - h2[i] * h2[i]);
    affine_backward(p[kDecW], z, tmp, g[kDecW], g[kDecB], d_z);
    for (std::size_t i = 0; i < latent_; ++i) {
      const double sigma = std::exp(0.5 * lv[i]);
      d_mu[i] = d_z[i] + mu[i] * inv_b;
      d_lv[i] = d_z[i] * noise(b, i) * 0.5 * sigma - 0.5 * (1.0 - std::exp(lv[i])) * inv_b;
    }
    affine_backward(p[kMuW], h1, d_mu, g[kMuW], g[kMuB], d_h1);
    affine_backward(p[kLogvarW], h1, d_lv, g[kLogvarW], g[kLogvarB], tmp);
    for (std::size_t i = 0; i < hidden_; ++i) {
      d_h1[i] = (d_h1[i] + tmp[i]) * (1.0 - h1[i] * h1[i]);
    }
    affine_backward(p[kEncW], x, d_h1, g[kEncW], g[kEncB], none);
  }
  return total * inv_b;
}

double VaeNetwork::reconstruction_error(std::span<const double> x) const {
  const auto& p = params;
  std::vector<double> h1(hidden_), mu(latent_), h2(hidden_), out(input_);
  affine(p[kEncW], p[kEncB], x, h1);
  for (auto& v : h1) v = std::tanh(v);
  affine(p[kMuW], p[kMuB], h1, mu);
  affine(p[kDecW], p[kDecB], mu, h2);
  for (auto& v : h2) v = std::tanh(v);
  affine(p[kOutW], p[kOutB], h2, out);
  double sq = 0.0;
  for (std::size_t i = 0; i < input_; ++i) sq += (out[i] - x[i]) * (out[i] - x[i]);
  return sq / static_cast<double>(input_);
}

VaeModel VaeModel::fit(const TimeSeriesSet& train, const VaeParams& params, std::uint64_t seed) {
  if (params.window == 0 || params.hidden == 0 || params.latent == 0 || params.batch == 0) {
    throw ParameterError("vae_recon sizes must be positive");
  }
  if (params.window > train.length()) {
    throw SizeError("vae_recon window " + std::to_string(params.window) + " exceeds length " +
                    std::to_string(train.length()));
  }
  VaeModel model;
  model.params_ = params;
  const std::size_t n = train.metric_count();
  model.mean_.resize(n);
  model.scale_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = train.metric(j);
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(col.size()));
    model.mean_[j] = m;
    model.scale_[j] = sd > 1e-12 ? sd : 1.0;
  }

  model.net_ = VaeNetwork(params.window * n, params.hidden, params.latent);
  model.net_.initialize(derive_seed(seed, 0));

  const std::size_t count = train.length() - params.window + 1;
  std::vector<std::vector<double>> windows(count);
  for (std::size_t s = 0; s < count; ++s) windows[s] = model.flatten(train, s);

  Rng rng(derive_seed(seed, 1));
  std::vector<std::size_t> order(count);
  ParamSet grad = model.net_.params.zeros_like();
  std::vector<std::vector<double>> batch;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < count; start += params.batch) {
      const std::size_t stop = std::min(count, start + params.batch);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(windows[order[i]]);
      Matrix noise(batch.size(), params.latent);
      for (auto& v : noise.data) v = rng.normal();
      for (auto& t : grad.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
      const double loss = model.net_.batch_loss(batch, noise, &grad);
      if (!std::isfinite(loss)) {
        throw NumericError("vae_recon training diverged at epoch " + std::to_string(epoch));
      }
      for (std::size_t t = 0; t < grad.tensors.size(); ++t) {
        auto& w = model.net_.params[t].values;
        const auto& g = grad[t].values;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= params.learning_rate * g[i];
      }
      epoch_loss += loss;
      ++batches;
    }
    model.losses_.push_back(epoch_loss / static_cast<double>(batches));
  }
  if (!model.net_.params.all_finite()) throw NumericError("vae_recon produced non-finite weights");
  return model;
}

std::vector<double> VaeModel::flatten(const TimeSeriesSet& ts, std::size_t start) const {
  const std::size_t n = ts.metric_count();
  std::vector<double> out(params_.window * n);
  for (std::size_t tau = 0; tau < params_.window; ++tau) {
    for (std::size_t j = 0; j < n; ++j) {
      out[tau * n + j] = (ts.at(start + tau, j) - mean_[j]) / scale_[j];
    }
  }
  return out;
}

double VaeModel::window_error(const TimeSeriesSet& ts, std::size_t start) const {
  return net_.reconstruction_error(flatten(ts, start));
}

std::vector<double> VaeModel::score_range(const TimeSeriesSet& ts, std::size_t begin,
                                          std::size_t end) const {
  const std::size_t w = params_.window;
  const std::size_t T = ts.length();
  if (w > T) {
    throw SizeError("vae_recon window " + std::to_string(w) + " exceeds length " + std::to_string(T));
  }
  std::vector<double> out;
  if (begin >= end) return out;
  const std::size_t first = begin + 1 >= w ? begin + 1 - w : 0;
  const std::size_t last = std::min(end - 1, T - w);
  std::vector<double> errors(last - first + 1);
  for (std::size_t s = first; s <= last; ++s) errors[s - first] = window_error(ts, s);

  out.reserve(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    const std::size_t lo = t + 1 >= w ? t + 1 - w : 0;
    const std::size_t hi = std::min(t, T - w);
    double acc = 0.0;
    for (std::size_t s = lo; s <= hi; ++s) acc += errors[s - first];
    out.push_back(acc / static_cast<double>(hi - lo + 1));
  }
  return out;
}

nlohmann::json VaeModel::to_json() const {
  return {{"window", params_.window},
          {"hidden", params_.hidden},
          {"latent", params_.latent},
          {"epochs", params_.epochs},
          {"batch", params_.batch},
          {"learning_rate", params_.learning_rate},
          {"mean", mean_},
          {"scale", scale_},
          {"params", net_.params.to_json()},
          {"loss_history", losses_}};
}

VaeModel VaeModel::from_json(const nlohmann::json& j, std::size_t metric_count) {
  VaeModel model;
  model.params_.window = j.at("window").get<std::size_t>();
  model.params_.hidden = j.at("hidden").get<std::size_t>();
  model.params_.latent = j.at("latent").get<std::size_t>();
  model.params_.epochs = j.at("epochs").get<std::size_t>();
  model.params_.batch = j.at("batch").get<std::size_t>();
  model.params_.learning_rate = j.at("learning_rate").get<double>();
  model.mean_ = j.at("mean").get<std::vector<double>>();
  model.scale_ = j.at("scale").get<std::vector<double>>();
  if (model.mean_.size() != metric_count || model.scale_.size() != metric_count) {
    throw ShapeError("vae_recon standardization does not match metric count");
  }
  model.net_ = VaeNetwork(model.params_.window * metric_count, model.params_.hidden, model.params_.latent);
  model.net_.params = ParamSet::from_json(j.at("params"), model.net_.params);
  model.losses_ = j.at("loss_history").get<std::vector<double>>();
  return model;
}

}  // namespace ymir::detectors
