#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ymir::detectors {

inline constexpr double kScoreEpsilon = 1e-8;

// Per-metric score rules. The fitted detectors apply these to every metric
// and keep the pointwise maximum.

/// |x_t − mean(x_{t−w..t−1})| / (sd(x_{t−w..t−1}) + ε), population sd; for
/// t < w the statistics of the first min(w, T) points are used.
std::vector<double> moving_average_score(std::span<const double> x, std::size_t window);
double moving_average_score_at(std::span<const double> x, std::size_t t, std::size_t window);

/// 0 if z ≤ 1, else 1 − 1/z² with z = |x − μ| / σ (σ = 0 replaced by ε).
double chebyshev_score(double x, double mean, double sd);

/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse);

/// Saliency map of one window: |IFFT(exp(log A − meanfilter_q(log A) + iP))|.
std::vector<double> saliency_map(std::span<const double> window, std::size_t filter);

/// Spectral residual score for every index. The window ending at t scores t;
/// indices before the first full window read their value off that window.
std::vector<double> spectral_residual_score(std::span<const double> x, std::size_t window,
                                            std::size_t filter);
double spectral_residual_score_at(std::span<const double> x, std::size_t t, std::size_t window,
                                  std::size_t filter);

struct MediffParams {
  std::size_t period = 0;
  std::size_t lags = 3;
};

/// |x_t − median of the `lags` seasonal lags|; trailing median of the last
/// `period` points while fewer lags exist; 0 at t = 0.
double mediff_deviation(std::span<const double> x, std::size_t t, const MediffParams& p);

/// 1.4826·MAD of the training deviations.
double mediff_scale(std::span<const double> train, const MediffParams& p);

std::vector<double> mediff_score(std::span<const double> train, std::span<const double> series,
                                 const MediffParams& p);

/// Per-phase medians plus a global level, fitted on a training segment whose
/// first point has phase 0.
struct SeasonalProfile {
  std::size_t period = 0;
  std::vector<double> phase_median;
  double level = 0.0;
  double scale = 0.0;  // 1.4826·MAD of training residuals

  double residual(double x, std::size_t phase) const { return x - phase_median[phase] - level; }
  double score(double x, std::size_t phase) const;
};

SeasonalProfile fit_seasonal_profile(std::span<const double> train, std::size_t period);

/// Robust residual z of `series`, whose index 0 has phase `phase_offset`.
std::vector<double> shesd_residual_score(const SeasonalProfile& profile,
                                         std::span<const double> series,
                                         std::size_t phase_offset = 0);

}  // namespace ymir::detectors
