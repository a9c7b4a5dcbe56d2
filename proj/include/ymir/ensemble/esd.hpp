#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ymir::ensemble {

/// ⌈0.02·N⌉, at least 1.
std::size_t default_max_outliers(std::size_t n);

/// λ_i for i = 1..r, the Rosner critical values for a sample of size n.
std::vector<double> esd_critical_values(std::size_t n, double alpha, std::size_t max_outliers);

/// Rosner's generalized ESD test with precomputed critical values, for
/// repeated use on samples of one size (the sliding-window flagger).
class GeneralizedEsd {
 public:
  /// Throws SizeError for n < 3, ParameterError for alpha outside (0, 1).
  GeneralizedEsd(std::size_t n, double alpha, std::optional<std::size_t> max_outliers = std::nullopt);

  /// Outlier indices in ascending order; never more than max_outliers().
  std::vector<std::size_t> run(std::span<const double> x) const;

  std::size_t sample_size() const { return n_; }
  std::size_t max_outliers() const { return lambda_.size(); }
  const std::vector<double>& critical_values() const { return lambda_; }

 private:
  std::size_t n_;
  std::vector<double> lambda_;
};

/// One-shot form. Throws SizeError when x has fewer than 3 points.
std::vector<std::size_t> generalized_esd(std::span<const double> x, double alpha = 0.05,
                                         std::optional<std::size_t> max_outliers = std::nullopt);

}  // namespace ymir::ensemble
