#include "ymir/ensemble/esd.hpp"

#include <algorithm>
#include <cmath>

#include "ymir/ensemble/student_t.hpp"
#include "ymir/error.hpp"

namespace ymir::ensemble {

std::size_t default_max_outliers(std::size_t n) {
  const auto r = static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(n)));
  return std::max<std::size_t>(1, r);
}

std::vector<double> esd_critical_values(std::size_t n, double alpha, std::size_t max_outliers) {
  std::vector<double> lambda;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 1; i <= max_outliers; ++i) {
    const double id = static_cast<double>(i);
    const double p = 1.0 - alpha / (2.0 * (nd - id + 1.0));
    const double dof = nd - id - 1.0;
    const double t = student_t_quantile(p, dof);
    lambda.push_back((nd - id) * t / std::sqrt((dof + t * t) * (nd - id + 1.0)));
  }
  return lambda;
}

GeneralizedEsd::GeneralizedEsd(std::size_t n, double alpha, std::optional<std::size_t> max_outliers)
    : n_(n) {
  if (n < 3) throw SizeError("generalized ESD needs at least 3 points, got " + std::to_string(n));
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw ParameterError("ESD alpha must be in (0, 1)");
  std::size_t r = max_outliers.value_or(default_max_outliers(n));
  if (r == 0) throw ParameterError("ESD max_outliers must be at least 1");
  r = std::min(r, n - 2);  // each step needs at least one degree of freedom
  lambda_ = esd_critical_values(n, alpha, r);
}

std::vector<std::size_t> GeneralizedEsd::run(std::span<const double> x) const {
  if (x.size() != n_) {
    throw SizeError("ESD configured for " + std::to_string(n_) + " points, got " + std::to_string(x.size()));
  }
  std::vector<bool> removed(n_, false);
  std::vector<std::size_t> order;
  std::size_t declared = 0;
  for (std::size_t step = 0; step < lambda_.size(); ++step) {
    const double remaining = static_cast<double>(n_ - step);
    double sum = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!removed[i]) sum += x[i];
    }
    const double mean = sum / remaining;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!removed[i]) ss += (x[i] - mean) * (x[i] - mean);
    }
    const double sd = std::sqrt(ss / (remaining - 1.0));
    if (!(sd > 0.0)) break;

    std::size_t arg = n_;
    double best = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (removed[i]) continue;
      const double dev = std::abs(x[i] - mean);
      if (dev > best) {
        best = dev;
        arg = i;
      }
    }
    removed[arg] = true;
    order.push_back(arg);
    if (best / sd > lambda_[step]) declared = step + 1;
  }
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(declared));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> generalized_esd(std::span<const double> x, double alpha,
                                         std::optional<std::size_t> max_outliers) {
  return GeneralizedEsd(x.size(), alpha, max_outliers).run(x);
}

}  // namespace ymir::ensemble
