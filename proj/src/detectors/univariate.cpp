#include "ymir/detectors/univariate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ymir/error.hpp"
#include "ymir/stats.hpp"

namespace ymir::detectors {

double moving_average_score_at(std::span<const double> x, std::size_t t, std::size_t window) {
  const std::size_t begin = t < window ? 0 : t - window;
  const std::size_t end = t < window ? std::min(window, x.size()) : t;
  const auto ref = x.subspan(begin, end - begin);
  const double m = stats::mean(ref);
  const double sd = stats::population_sd(ref);
  return std::abs(x[t] - m) / (sd + kScoreEpsilon);
}

std::vector<double> moving_average_score(std::span<const double> x, std::size_t window) {
  if (window < 2) throw ParameterError("moving_average window must be at least 2");
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = moving_average_score_at(x, t, window);
  return out;
}

double chebyshev_score(double x, double mean, double sd) {
  const double sigma = sd > 0.0 ? sd : kScoreEpsilon;
  const double z = std::abs(x - mean) / sigma;
  if (z <= 1.0) return 0.0;
  return 1.0 - 1.0 / (z * z);
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw ParameterError("FFT size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const double phi = angle * static_cast<double>(k);
        const std::complex<double> w(std::cos(phi), std::sin(phi));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
  if (inverse) {
    for (auto& v : a) v /= static_cast<double>(n);
  }
}

std::vector<double> saliency_map(std::span<const double> window, std::size_t filter) {
  const std::size_t n = window.size();
  std::vector<std::complex<double>> spectrum(window.begin(), window.end());
  fft(spectrum, false);

  std::vector<double> log_amp(n);
  std::vector<double> phase(n);
  for (std::size_t f = 0; f < n; ++f) {
    log_amp[f] = std::log(std::abs(spectrum[f]) + kScoreEpsilon);
    phase[f] = std::arg(spectrum[f]);
  }
  // The spectrum is periodic, so the mean filter wraps around.
  const std::size_t half = filter / 2;
  for (std::size_t f = 0; f < n; ++f) {
    double sum = 0.0;
    for (std::size_t k = 0; k < filter; ++k) sum += log_amp[(f + n + k - half) % n];
    const double residual = log_amp[f] - sum / static_cast<double>(filter);
    spectrum[f] = std::polar(std::exp(residual), phase[f]);
  }
  fft(spectrum, true);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(spectrum[i]);
  return out;
}

double spectral_residual_score_at(std::span<const double> x, std::size_t t, std::size_t window,
                                  std::size_t filter) {
  if (window > x.size()) {
    throw SizeError("spectral_residual window " + std::to_string(window) + " exceeds length " +
                    std::to_string(x.size()));
  }
  const std::size_t start = t + 1 >= window ? t + 1 - window : 0;
  const std::size_t pos = t - start;
  const auto w = x.subspan(start, window);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  if (*lo == *hi || pos == 0) return 0.0;

  const auto saliency = saliency_map(w, filter);
  double local = 0.0;
  for (std::size_t i = 0; i < pos; ++i) local += saliency[i];
  local /= static_cast<double>(pos);
  return std::max(0.0, (saliency[pos] - local) / (local + kScoreEpsilon));
}

std::vector<double> spectral_residual_score(std::span<const double> x, std::size_t window,
                                            std::size_t filter) {
  if (window == 0 || (window & (window - 1)) != 0) {
    throw ParameterError("spectral_residual window must be a power of two");
  }
  if (filter % 2 == 0) throw ParameterError("spectral_residual filter must be odd");
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) out[t] = spectral_residual_score_at(x, t, window, filter);
  return out;
}

double mediff_deviation(std::span<const double> x, std::size_t t, const MediffParams& p) {
  if (t == 0) return 0.0;
  std::vector<double> ref;
  if (t >= p.lags * p.period) {
    ref.reserve(p.lags);
    for (std::size_t k = 1; k <= p.lags; ++k) ref.push_back(x[t - k * p.period]);
  } else {
    const std::size_t begin = t >= p.period ? t - p.period : 0;
    ref.assign(x.begin() + static_cast<std::ptrdiff_t>(begin), x.begin() + static_cast<std::ptrdiff_t>(t));
  }
  return std::abs(x[t] - stats::lower_median(ref));
}

namespace {
void check_mediff(const MediffParams& p) {
  if (p.period < 2) throw ParameterError("mediff period must be at least 2");
  if (p.lags < 1) throw ParameterError("mediff lags must be at least 1");
}
}  // namespace

double mediff_scale(std::span<const double> train, const MediffParams& p) {
  check_mediff(p);
  std::vector<double> d(train.size());
  for (std::size_t t = 0; t < train.size(); ++t) d[t] = mediff_deviation(train, t, p);
  return stats::kMadToSigma * stats::mad(d);
}

std::vector<double> mediff_score(std::span<const double> train, std::span<const double> series,
                                 const MediffParams& p) {
  const double scale = mediff_scale(train, p);
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = mediff_deviation(series, t, p) / (scale + kScoreEpsilon);
  }
  return out;
}

double SeasonalProfile::score(double x, std::size_t phase) const {
  return std::abs(residual(x, phase)) / (scale + kScoreEpsilon);
}

SeasonalProfile fit_seasonal_profile(std::span<const double> train, std::size_t period) {
  if (period < 2) throw ParameterError("shesd period must be at least 2");
  if (2 * period > train.size()) {
    throw ParameterError("shesd needs at least two periods of training data (" +
                         std::to_string(2 * period) + " points)");
  }
  SeasonalProfile profile;
  profile.period = period;
  profile.phase_median.resize(period);
  std::vector<double> bucket;
  for (std::size_t phase = 0; phase < period; ++phase) {
    bucket.clear();
    for (std::size_t t = phase; t < train.size(); t += period) bucket.push_back(train[t]);
    profile.phase_median[phase] = stats::lower_median(bucket);
  }
  std::vector<double> deseasonalized(train.size());
  for (std::size_t t = 0; t < train.size(); ++t) {
    deseasonalized[t] = train[t] - profile.phase_median[t % period];
  }
  profile.level = stats::lower_median(deseasonalized);
  std::vector<double> residuals(train.size());
  for (std::size_t t = 0; t < train.size(); ++t) residuals[t] = deseasonalized[t] - profile.level;
  profile.scale = stats::kMadToSigma * stats::mad(residuals);
  return profile;
}

std::vector<double> shesd_residual_score(const SeasonalProfile& profile, std::span<const double> series,
                                         std::size_t phase_offset) {
  std::vector<double> out(series.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    out[t] = profile.score(series[t], (t + phase_offset) % profile.period);
  }
  return out;
}

}  // namespace ymir::detectors
