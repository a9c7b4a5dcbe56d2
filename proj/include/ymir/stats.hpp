#pragma once

#include <span>
#include <vector>

namespace ymir::stats {

inline constexpr double kMadToSigma = 1.4826;

double mean(std::span<const double> x);

/// Population standard deviation (divides by N).
double population_sd(std::span<const double> x);

/// Sample standard deviation (divides by N - 1); 0 for N < 2.
double sample_sd(std::span<const double> x);

/// Lower median: element (N-1)/2 of the sorted sample. Empty input → 0.
double lower_median(std::span<const double> x);

/// Median absolute deviation around the lower median (also lower median).
double mad(std::span<const double> x);

/// Empirical percentile with linear interpolation between order statistics,
/// q in [0, 1]. Empty input → 0.
double percentile(std::span<const double> x, double q);

}  // namespace ymir::stats
