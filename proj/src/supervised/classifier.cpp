#include "ymir/supervised/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ymir/error.hpp"
#include "ymir/rng.hpp"

namespace ymir::supervised {
namespace {

constexpr double kLayerNormEps = 1e-5;

// C[r×c] += A[r×k]·B[k×c]
void gemm_nn(std::size_t r, std::size_t k, std::size_t c, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < r; ++i) {
    double* orow = out + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      const double* brow = b + p * c;
      for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
}

// C[k×c] += A[r×k]ᵀ·B[r×c]
void gemm_tn(std::size_t r, std::size_t k, std::size_t c, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* brow = b + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      double* orow = out + p * c;
      for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
    }
  }
}

// C[r×k] += A[r×c]·B[k×c]ᵀ
void gemm_nt(std::size_t r, std::size_t k, std::size_t c, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < r; ++i) {
    const double* arow = a + i * c;
    for (std::size_t p = 0; p < k; ++p) {
      const double* brow = b + p * c;
      double acc = 0.0;
      for (std::size_t j = 0; j < c; ++j) acc += arow[j] * brow[j];
      out[i * k + p] += acc;
    }
  }
}

void add_row_bias(Matrix& m, const std::vector<double>& bias) {
  for (std::size_t t = 0; t < m.rows; ++t) {
    for (std::size_t j = 0; j < m.cols; ++j) m(t, j) += bias[j];
  }
}

void accumulate_column_sums(const Matrix& m, std::vector<double>& out) {
  for (std::size_t t = 0; t < m.rows; ++t) {
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += m(t, j);
  }
}

struct LayerNormCache {
  Matrix xhat;
  std::vector<double> inv_sd;
};

void layer_norm(const Matrix& x, const Tensor& gain, const Tensor& bias, Matrix& y, LayerNormCache& cache) {
  const std::size_t n = x.cols;
  y = Matrix(x.rows, n);
  cache.xhat = Matrix(x.rows, n);
  cache.inv_sd.assign(x.rows, 0.0);
  for (std::size_t t = 0; t < x.rows; ++t) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x(t, j);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x(t, j) - mu) * (x(t, j) - mu);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_sd[t] = inv;
    for (std::size_t j = 0; j < n; ++j) {
      const double xh = (x(t, j) - mu) * inv;
      cache.xhat(t, j) = xh;
      y(t, j) = gain.values[j] * xh + bias.values[j];
    }
  }
}

// Returns dx; accumulates gain/bias gradients.
Matrix layer_norm_backward(const Matrix& dy, const Tensor& gain, const LayerNormCache& cache,
                           Tensor& dgain, Tensor& dbias) {
  const std::size_t n = dy.cols;
  Matrix dx(dy.rows, n);
  std::vector<double> dxhat(n);
  for (std::size_t t = 0; t < dy.rows; ++t) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double g = dy(t, j);
      dgain.values[j] += g * cache.xhat(t, j);
      dbias.values[j] += g;
      dxhat[j] = g * gain.values[j];
      m1 += dxhat[j];
      m2 += dxhat[j] * cache.xhat(t, j);
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      dx(t, j) = cache.inv_sd[t] * (dxhat[j] - m1 - cache.xhat(t, j) * m2);
    }
  }
  return dx;
}

Matrix positional_encoding(std::size_t window, std::size_t d) {
  Matrix pe(window, d);
  for (std::size_t t = 0; t < window; ++t) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe(t, i) = std::sin(static_cast<double>(t) * freq);
      if (i + 1 < d) pe(t, i + 1) = std::cos(static_cast<double>(t) * freq);
    }
  }
  return pe;
}

struct EncoderCache {
  const Matrix* input = nullptr;
  Matrix e0, q, k, v, probs, heads, r1, y1, z1, f1, r2, y2;
  LayerNormCache ln1, ln2;
};

struct ForwardCache {
  EncoderCache raw, feat;
  Matrix concat;  // w×2d
  Matrix conv;    // pre-activation w×c
  std::vector<double> pooled;
  double logit = 0.0;
};

ParamSet make_layout(const ClassifierHyper& h) {
  const std::size_t d = h.d_model;
  ParamSet ps;
  for (const auto& [prefix, m] : {std::pair<std::string, std::size_t>{"raw_", h.metric_count},
                                  std::pair<std::string, std::size_t>{"feat_", h.model_count}}) {
    ps.tensors.push_back(Tensor::zeros(prefix + "in_w", {m, d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "in_b", {d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "wq", {d, d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "wk", {d, d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "wv", {d, d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "wo", {d, d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ln1_g", {d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ln1_b", {d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ff1_w", {d, 2 * d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ff1_b", {2 * d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ff2_w", {2 * d, d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ff2_b", {d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ln2_g", {d}));
    ps.tensors.push_back(Tensor::zeros(prefix + "ln2_b", {d}));
  }
  ps.tensors.push_back(Tensor::zeros("conv_w", {3, 2 * d, h.channels}));
  ps.tensors.push_back(Tensor::zeros("conv_b", {h.channels}));
  ps.tensors.push_back(Tensor::zeros("out_w", {h.channels}));
  ps.tensors.push_back(Tensor::zeros("out_b", {1}));
  return ps;
}

void validate_hyper(const ClassifierHyper& h) {
  if (h.window == 0 || h.d_model == 0 || h.channels == 0) {
    throw ParameterError("classifier window, d_model and channels must be positive");
  }
  if (h.metric_count == 0 || h.model_count == 0) {
    throw ParameterError("classifier needs at least one metric and one feature column");
  }
}

class Network {
 public:
  Network(const ClassifierHyper& h, const ParamSet& p) : h_(h), p_(p) {}

  void encoder_forward(std::size_t base, const Matrix& x, const Matrix& pe, EncoderCache& c) const {
    const std::size_t w = h_.window, d = h_.d_model, m = x.cols;
    c.input = &x;
    c.e0 = pe;
    add_row_bias(c.e0, p_[base + ClassifierModel::kInB].values);
    gemm_nn(w, m, d, x.data.data(), p_[base + ClassifierModel::kInW].values.data(), c.e0.data.data());

    c.q = Matrix(w, d);
    c.k = Matrix(w, d);
    c.v = Matrix(w, d);
    gemm_nn(w, d, d, c.e0.data.data(), p_[base + ClassifierModel::kWq].values.data(), c.q.data.data());
    gemm_nn(w, d, d, c.e0.data.data(), p_[base + ClassifierModel::kWk].values.data(), c.k.data.data());
    gemm_nn(w, d, d, c.e0.data.data(), p_[base + ClassifierModel::kWv].values.data(), c.v.data.data());

    c.probs = Matrix(w, w);
    gemm_nt(w, w, d, c.q.data.data(), c.k.data.data(), c.probs.data.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < w; ++i) {
      auto row = c.probs.row(i);
      double mx = -INFINITY;
      for (auto& s : row) {
        s *= scale;
        mx = std::max(mx, s);
      }
      double total = 0.0;
      for (auto& s : row) {
        s = std::exp(s - mx);
        total += s;
      }
      for (auto& s : row) s /= total;
    }
    c.heads = Matrix(w, d);
    gemm_nn(w, w, d, c.probs.data.data(), c.v.data.data(), c.heads.data.data());

    c.r1 = c.e0;
    gemm_nn(w, d, d, c.heads.data.data(), p_[base + ClassifierModel::kWo].values.data(), c.r1.data.data());
    layer_norm(c.r1, p_[base + ClassifierModel::kLn1G], p_[base + ClassifierModel::kLn1B], c.y1, c.ln1);

    c.z1 = Matrix(w, 2 * d);
    add_row_bias(c.z1, p_[base + ClassifierModel::kFf1B].values);
    gemm_nn(w, d, 2 * d, c.y1.data.data(), p_[base + ClassifierModel::kFf1W].values.data(), c.z1.data.data());
    c.f1 = c.z1;
    for (auto& v : c.f1.data) v = v > 0.0 ? v : 0.0;

    c.r2 = c.y1;
    add_row_bias(c.r2, p_[base + ClassifierModel::kFf2B].values);
    gemm_nn(w, 2 * d, d, c.f1.data.data(), p_[base + ClassifierModel::kFf2W].values.data(), c.r2.data.data());
    layer_norm(c.r2, p_[base + ClassifierModel::kLn2G], p_[base + ClassifierModel::kLn2B], c.y2, c.ln2);
  }

  void forward(const Matrix& raw, const Matrix& features, const Matrix& pe, ForwardCache& c) const {
    const std::size_t w = h_.window, d = h_.d_model, ch = h_.channels;
    encoder_forward(ClassifierModel::kRawEncoder, raw, pe, c.raw);
    encoder_forward(ClassifierModel::kFeatEncoder, features, pe, c.feat);

    c.concat = Matrix(w, 2 * d);
    for (std::size_t t = 0; t < w; ++t) {
      std::copy(c.raw.y2.row(t).begin(), c.raw.y2.row(t).end(), c.concat.row(t).begin());
      std::copy(c.feat.y2.row(t).begin(), c.feat.y2.row(t).end(),
                c.concat.row(t).begin() + static_cast<std::ptrdiff_t>(d));
    }
    for (double v : c.concat.data) {
      if (!std::isfinite(v)) throw NumericError("non-finite encoder activation");
    }

    const auto& cw = p_[ClassifierModel::kConvW].values;
    c.conv = Matrix(w, ch);
    add_row_bias(c.conv, p_[ClassifierModel::kConvB].values);
    for (std::size_t tap = 0; tap < 3; ++tap) {
      // Output row t reads input row t + tap − 1; rows outside the window are zero.
      const std::size_t lo = tap == 0 ? 1 : 0;
      const std::size_t hi = tap == 2 ? w - 1 : w;
      if (lo >= hi) continue;
      gemm_nn(hi - lo, 2 * d, ch, c.concat.data.data() + (lo + tap - 1) * 2 * d,
              cw.data() + tap * 2 * d * ch, c.conv.data.data() + lo * ch);
    }

    c.pooled.assign(ch, 0.0);
    for (std::size_t t = 0; t < w; ++t) {
      for (std::size_t o = 0; o < ch; ++o) c.pooled[o] += std::max(c.conv(t, o), 0.0);
    }
    c.logit = p_[ClassifierModel::kOutB].values[0];
    for (std::size_t o = 0; o < ch; ++o) {
      c.pooled[o] /= static_cast<double>(w);
      c.logit += p_[ClassifierModel::kOutW].values[o] * c.pooled[o];
    }
    if (!std::isfinite(c.logit)) throw NumericError("non-finite classifier logit");
  }

  void encoder_backward(std::size_t base, const Matrix& dy2, const EncoderCache& c, ParamSet& g) const {
    const std::size_t w = h_.window, d = h_.d_model, m = c.input->cols;
    const auto& P = p_;
    Matrix dr2 = layer_norm_backward(dy2, P[base + ClassifierModel::kLn2G], c.ln2,
                                     g[base + ClassifierModel::kLn2G], g[base + ClassifierModel::kLn2B]);
    // r2 = y1 + f1·ff2_w + ff2_b
    Matrix dy1 = dr2;
    accumulate_column_sums(dr2, g[base + ClassifierModel::kFf2B].values);
    gemm_tn(w, 2 * d, d, c.f1.data.data(), dr2.data.data(), g[base + ClassifierModel::kFf2W].values.data());
    Matrix dz1(w, 2 * d);
    gemm_nt(w, 2 * d, d, dr2.data.data(), P[base + ClassifierModel::kFf2W].values.data(), dz1.data.data());
    for (std::size_t i = 0; i < dz1.data.size(); ++i) {
      if (!(c.z1.data[i] > 0.0)) dz1.data[i] = 0.0;
    }
    accumulate_column_sums(dz1, g[base + ClassifierModel::kFf1B].values);
    gemm_tn(w, d, 2 * d, c.y1.data.data(), dz1.data.data(), g[base + ClassifierModel::kFf1W].values.data());
    gemm_nt(w, d, 2 * d, dz1.data.data(), P[base + ClassifierModel::kFf1W].values.data(), dy1.data.data());

    Matrix dr1 = layer_norm_backward(dy1, P[base + ClassifierModel::kLn1G], c.ln1,
                                     g[base + ClassifierModel::kLn1G], g[base + ClassifierModel::kLn1B]);
    // r1 = e0 + heads·wo
    Matrix de0 = dr1;
    gemm_tn(w, d, d, c.heads.data.data(), dr1.data.data(), g[base + ClassifierModel::kWo].values.data());
    Matrix dheads(w, d);
    gemm_nt(w, d, d, dr1.data.data(), P[base + ClassifierModel::kWo].values.data(), dheads.data.data());

    // heads = probs·v
    Matrix dprobs(w, w);
    gemm_nt(w, w, d, dheads.data.data(), c.v.data.data(), dprobs.data.data());
    Matrix dv(w, d);
    gemm_tn(w, w, d, c.probs.data.data(), dheads.data.data(), dv.data.data());

    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix dscores(w, w);
    for (std::size_t i = 0; i < w; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < w; ++j) dot += c.probs(i, j) * dprobs(i, j);
      for (std::size_t j = 0; j < w; ++j) dscores(i, j) = c.probs(i, j) * (dprobs(i, j) - dot) * scale;
    }
    Matrix dq(w, d), dk(w, d);
    gemm_nn(w, w, d, dscores.data.data(), c.k.data.data(), dq.data.data());
    gemm_tn(w, w, d, dscores.data.data(), c.q.data.data(), dk.data.data());

    const double* e0 = c.e0.data.data();
    gemm_tn(w, d, d, e0, dq.data.data(), g[base + ClassifierModel::kWq].values.data());
    gemm_tn(w, d, d, e0, dk.data.data(), g[base + ClassifierModel::kWk].values.data());
    gemm_tn(w, d, d, e0, dv.data.data(), g[base + ClassifierModel::kWv].values.data());
    gemm_nt(w, d, d, dq.data.data(), P[base + ClassifierModel::kWq].values.data(), de0.data.data());
    gemm_nt(w, d, d, dk.data.data(), P[base + ClassifierModel::kWk].values.data(), de0.data.data());
    gemm_nt(w, d, d, dv.data.data(), P[base + ClassifierModel::kWv].values.data(), de0.data.data());

    accumulate_column_sums(de0, g[base + ClassifierModel::kInB].values);
    gemm_tn(w, m, d, c.input->data.data(), de0.data.data(), g[base + ClassifierModel::kInW].values.data());
  }

  // dlogit is ∂loss/∂logit.
  void backward(const ForwardCache& c, double dlogit, ParamSet& g) const {
    const std::size_t w = h_.window, d = h_.d_model, ch = h_.channels;
    g[ClassifierModel::kOutB].values[0] += dlogit;
    Matrix dconv(w, ch);
    for (std::size_t o = 0; o < ch; ++o) {
      g[ClassifierModel::kOutW].values[o] += dlogit * c.pooled[o];
      const double dpool = dlogit * p_[ClassifierModel::kOutW].values[o] / static_cast<double>(w);
      for (std::size_t t = 0; t < w; ++t) dconv(t, o) = c.conv(t, o) > 0.0 ? dpool : 0.0;
    }
    accumulate_column_sums(dconv, g[ClassifierModel::kConvB].values);

    const auto& cw = p_[ClassifierModel::kConvW].values;
    auto& gcw = g[ClassifierModel::kConvW].values;
    Matrix dconcat(w, 2 * d);
    for (std::size_t tap = 0; tap < 3; ++tap) {
      const std::size_t lo = tap == 0 ? 1 : 0;
      const std::size_t hi = tap == 2 ? w - 1 : w;
      if (lo >= hi) continue;
      const double* in = c.concat.data.data() + (lo + tap - 1) * 2 * d;
      const double* dout = dconv.data.data() + lo * ch;
      gemm_tn(hi - lo, 2 * d, ch, in, dout, gcw.data() + tap * 2 * d * ch);
      gemm_nt(hi - lo, 2 * d, ch, dout, cw.data() + tap * 2 * d * ch,
              dconcat.data.data() + (lo + tap - 1) * 2 * d);
    }

    Matrix dy_raw(w, d), dy_feat(w, d);
    for (std::size_t t = 0; t < w; ++t) {
      for (std::size_t j = 0; j < d; ++j) {
        dy_raw(t, j) = dconcat(t, j);
        dy_feat(t, j) = dconcat(t, d + j);
      }
    }
    encoder_backward(ClassifierModel::kRawEncoder, dy_raw, c.raw, g);
    encoder_backward(ClassifierModel::kFeatEncoder, dy_feat, c.feat, g);
  }

 private:
  const ClassifierHyper& h_;
  const ParamSet& p_;
};

void check_shapes(const ClassifierHyper& h, const Matrix& raw, const Matrix& features) {
  if (raw.rows != h.window || raw.cols != h.metric_count || features.rows != h.window ||
      features.cols != h.model_count) {
    throw ShapeError("classifier expects windows of shape (" + std::to_string(h.window) + "," +
                     std::to_string(h.metric_count) + ") and (" + std::to_string(h.window) + "," +
                     std::to_string(h.model_count) + "), got (" + std::to_string(raw.rows) + "," +
                     std::to_string(raw.cols) + ") and (" + std::to_string(features.rows) + "," +
                     std::to_string(features.cols) + ")");
  }
}

void xavier(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : t.values) v = rng.uniform(-r, r);
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double bce_with_logit(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

ClassifierModel::ClassifierModel(const ClassifierHyper& hyper, std::uint64_t seed)
    : hyper_(hyper), seed_(seed) {
  validate_hyper(hyper_);
  params = make_layout(hyper_);
  positional_ = positional_encoding(hyper_.window, hyper_.d_model);
  const std::size_t d = hyper_.d_model;
  Rng rng(seed);
  for (std::size_t base : {kRawEncoder, kFeatEncoder}) {
    const std::size_t m = base == kRawEncoder ? hyper_.metric_count : hyper_.model_count;
    xavier(params[base + kInW], m, d, rng);
    for (std::size_t i : {kWq, kWk, kWv, kWo}) xavier(params[base + i], d, d, rng);
    xavier(params[base + kFf1W], d, 2 * d, rng);
    xavier(params[base + kFf2W], 2 * d, d, rng);
    std::fill(params[base + kLn1G].values.begin(), params[base + kLn1G].values.end(), 1.0);
    std::fill(params[base + kLn2G].values.begin(), params[base + kLn2G].values.end(), 1.0);
  }
  xavier(params[kConvW], 3 * 2 * d, 3 * hyper_.channels, rng);
  xavier(params[kOutW], hyper_.channels, 1, rng);
}

double ClassifierModel::logit(const Matrix& raw, const Matrix& features) const {
  check_shapes(hyper_, raw, features);
  ForwardCache cache;
  Network(hyper_, params).forward(raw, features, positional_, cache);
  return cache.logit;
}

double ClassifierModel::predict(const Matrix& raw, const Matrix& features) const {
  return sigmoid(logit(raw, features));
}

double ClassifierModel::loss_and_gradient(const Matrix& raw, const Matrix& features, double target,
                                          double weight, ParamSet* grad) const {
  check_shapes(hyper_, raw, features);
  ForwardCache cache;
  const Network net(hyper_, params);
  net.forward(raw, features, positional_, cache);
  if (grad != nullptr) net.backward(cache, weight * (sigmoid(cache.logit) - target), *grad);
  return weight * bce_with_logit(cache.logit, target);
}

nlohmann::json ClassifierModel::to_json() const {
  return {{"hyper",
           {{"window", hyper_.window},
            {"d_model", hyper_.d_model},
            {"channels", hyper_.channels},
            {"metric_count", hyper_.metric_count},
            {"model_count", hyper_.model_count}}},
          {"seed", seed_},
          {"metric_names", metric_names},
          {"model_ids", model_ids},
          {"standardizer", standardizer_.to_json()},
          {"loss_history", loss_history},
          {"params", params.to_json()}};
}

ClassifierModel ClassifierModel::from_json(const nlohmann::json& j) {
  ClassifierModel m;
  try {
    const auto& h = j.at("hyper");
    m.hyper_.window = h.at("window").get<std::size_t>();
    m.hyper_.d_model = h.at("d_model").get<std::size_t>();
    m.hyper_.channels = h.at("channels").get<std::size_t>();
    m.hyper_.metric_count = h.at("metric_count").get<std::size_t>();
    m.hyper_.model_count = h.at("model_count").get<std::size_t>();
    validate_hyper(m.hyper_);
    m.seed_ = j.at("seed").get<std::uint64_t>();
    m.metric_names = j.at("metric_names").get<std::vector<std::string>>();
    m.model_ids = j.at("model_ids").get<std::vector<std::string>>();
    m.standardizer_ = Standardizer::from_json(j.at("standardizer"));
    m.loss_history = j.at("loss_history").get<std::vector<double>>();
    m.params = ParamSet::from_json(j.at("params"), make_layout(m.hyper_));
    m.positional_ = positional_encoding(m.hyper_.window, m.hyper_.d_model);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("classifier document: ") + e.what());
  }
  if (m.standardizer_.mean.size() != m.hyper_.metric_count) {
    throw ShapeError("classifier standardizer does not match metric count");
  }
  if (!m.params.all_finite()) throw NumericError("classifier document holds non-finite parameters");
  return m;
}

double dataset_loss(const WindowClassifier& model, const Dataset& dataset) {
  if (dataset.samples.empty()) throw SizeError("empty dataset");
  double total = 0.0;
  for (const auto& s : dataset.samples) {
    const double p = model.predict(s.raw, s.features);
    // Clamp keeps log finite when the sigmoid saturates.
    const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
    total -= s.target * std::log(pc) + (1.0 - s.target) * std::log(1.0 - pc);
  }
  return total / static_cast<double>(dataset.samples.size());
}

namespace {

double model_dataset_loss(const ClassifierModel& model, const Dataset& dataset) {
  double total = 0.0;
  for (const auto& s : dataset.samples) {
    total += model.loss_and_gradient(s.raw, s.features, s.target, 1.0, nullptr);
  }
  return total / static_cast<double>(dataset.samples.size());
}

}  // namespace

ClassifierModel train_classifier(const Dataset& dataset, const TrainConfig& config,
                                 const ClassifierHyper& hyper, const Standardizer& standardizer) {
  config.validate();
  if (dataset.samples.empty()) throw SizeError("cannot train a classifier on an empty dataset");
  ClassifierHyper h = hyper;
  h.window = dataset.window;
  h.metric_count = dataset.metric_count;
  h.model_count = dataset.model_count;

  ClassifierModel model(h, derive_seed(config.seed, 0));
  model.set_standardizer(standardizer);
  Rng shuffle_rng(derive_seed(config.seed, 1));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ParamSet velocity = model.params.zeros_like();
  ParamSet grad = model.params.zeros_like();
  const std::size_t total = model.params.total_size();

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      double pos_weight = 1.0;
      if (config.balance_classes) {
        std::size_t pos = 0;
        for (std::size_t i = begin; i < end; ++i) pos += dataset.samples[order[i]].target > 0.5 ? 1 : 0;
        const std::size_t neg = (end - begin) - pos;
        if (pos > 0 && neg > 0) pos_weight = static_cast<double>(neg) / static_cast<double>(pos);
      }
      double weight_sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        weight_sum += dataset.samples[order[i]].target > 0.5 ? pos_weight : 1.0;
      }

      for (auto& t : grad.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = dataset.samples[order[i]];
        const double wgt = (s.target > 0.5 ? pos_weight : 1.0) / weight_sum;
        model.loss_and_gradient(s.raw, s.features, s.target, wgt, &grad);
      }
      for (std::size_t i = 0; i < total; ++i) {
        double& v = velocity.flat(i);
        v = config.momentum * v + grad.flat(i);
        model.params.flat(i) -= config.learning_rate * v;
      }
    }
    double loss = 0.0;
    try {
      loss = model_dataset_loss(model, dataset);
    } catch (const NumericError&) {
      loss = NAN;
    }
    if (!std::isfinite(loss) || !model.params.all_finite()) {
      throw NumericError("classifier training diverged at epoch " + std::to_string(epoch + 1));
    }
    model.loss_history.push_back(loss);
  }
  return model;
}

std::vector<double> predict_series(const WindowClassifier& model, const TimeSeriesSet& ts,
                                   const ensemble::FeatureMatrix& features) {
  const std::size_t T = ts.length();
  const std::size_t w = model.window();
  if (ts.metric_count() != model.metric_count() || features.model_count() != model.model_count()) {
    throw ShapeError("classifier was trained on " + std::to_string(model.metric_count()) +
                     " metrics and " + std::to_string(model.model_count()) + " feature columns");
  }
  if (features.length() != T) throw ShapeError("feature matrix length differs from the series");
  std::vector<double> out(T, 0.0);
  const auto views = sliding_windows(T, w);
  for (const auto& v : views) {
    out[v.center] = model.predict(raw_window(ts.values(), v.start, w, model.standardizer()),
                                  feature_window(features.values, v.start, w));
  }
  const std::size_t first = views.front().center;
  const std::size_t last = views.back().center;
  for (std::size_t t = 0; t < first; ++t) out[t] = out[first];
  for (std::size_t t = last + 1; t < T; ++t) out[t] = out[last];
  return out;
}

}  // namespace ymir::supervised
