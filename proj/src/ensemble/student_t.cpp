#include "ymir/ensemble/student_t.hpp"

#include <cmath>
#include <limits>

#include "ymir/error.hpp"

namespace ymir::ensemble {
namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double md = m;
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double inverse_regularized_incomplete_beta(double a, double b, double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    throw ParameterError("incomplete beta inverse needs p in [0, 1]");
  }
  const double lb = log_beta(a, b);
  // Solve I_{exp(u)}(a, b) = p for u = log x, which keeps tiny x accurate.
  double lo = std::log(std::numeric_limits<double>::min());
  double hi = 0.0;
  double u = (std::log(p) + std::log(a) + lb) / a;  // small-x asymptote
  if (!(u > lo && u < hi)) u = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    const double x = std::exp(u);
    const double g = regularized_incomplete_beta(a, b, x) - p;
    if (g == 0.0) return x;
    if (g < 0.0) {
      lo = u;
    } else {
      hi = u;
    }
    const double slope = std::exp(a * u + (b - 1.0) * std::log1p(-x) - lb);
    double next = u - g / slope;
    if (!std::isfinite(next) || next <= lo || next >= hi) next = 0.5 * (lo + hi);
    if (std::abs(next - u) < 1e-15 * std::max(1.0, std::abs(u))) return std::exp(next);
    u = next;
  }
  return std::exp(u);
}

double student_t_cdf(double t, double dof) {
  if (!(dof > 0.0)) throw ParameterError("student t needs positive degrees of freedom");
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
  return t > 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double dof) {
  if (!(dof > 0.0)) throw ParameterError("student t needs positive degrees of freedom");
  if (!(p > 0.0) || !(p < 1.0)) throw ParameterError("student t quantile needs p in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -student_t_quantile(1.0 - p, dof);
  const double x = inverse_regularized_incomplete_beta(0.5 * dof, 0.5, 2.0 * (1.0 - p));
  return std::sqrt(dof * (1.0 - x) / x);
}

}  // namespace ymir::ensemble
