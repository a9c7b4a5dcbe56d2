#pragma once

// Reference implementations used only by tests. They follow the textbook
// definitions directly and share no code with the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace oracle {

// Rosner's generalized ESD with Boost's t quantiles.
inline std::vector<std::size_t> rosner_esd(const std::vector<double>& x, double alpha, std::size_t r) {
  const std::size_t n = x.size();
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  std::vector<std::size_t> removed;
  std::size_t declared = 0;
  for (std::size_t i = 1; i <= r && alive.size() >= 3; ++i) {
    double mean = 0.0;
    for (auto idx : alive) mean += x[idx];
    mean /= static_cast<double>(alive.size());
    double ss = 0.0;
    for (auto idx : alive) ss += (x[idx] - mean) * (x[idx] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(alive.size() - 1));
    if (sd == 0.0) break;
    std::size_t best = 0;
    double best_dev = -1.0;
    for (std::size_t a = 0; a < alive.size(); ++a) {
      const double dev = std::abs(x[alive[a]] - mean);
      if (dev > best_dev) {
        best_dev = dev;
        best = a;
      }
    }
    const double R = best_dev / sd;
    const double ni = static_cast<double>(n - i + 1);
    const double p = 1.0 - alpha / (2.0 * ni);
    const double dof = static_cast<double>(n - i - 1);
    const double t = boost::math::quantile(boost::math::students_t(dof), p);
    const double lambda = static_cast<double>(n - i) * t /
                          std::sqrt((static_cast<double>(n - i - 1) + t * t) * ni);
    removed.push_back(alive[best]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best));
    if (R > lambda) declared = i;
  }
  std::vector<std::size_t> out(removed.begin(), removed.begin() + static_cast<std::ptrdiff_t>(declared));
  std::sort(out.begin(), out.end());
  return out;
}

// Range recall under flat bias, computed point by point.
inline double range_recall(const std::vector<int>& real, const std::vector<int>& pred, double alpha) {
  double total = 0.0;
  std::size_t ranges = 0;
  std::size_t t = 0;
  while (t < real.size()) {
    if (!real[t]) {
      ++t;
      continue;
    }
    std::size_t len = 0, hit = 0;
    while (t < real.size() && real[t]) {
      ++len;
      if (pred[t]) ++hit;
      ++t;
    }
    ++ranges;
    const double overlap = static_cast<double>(hit) / static_cast<double>(len);
    total += alpha * (hit > 0 ? 1.0 : 0.0) + (1.0 - alpha) * overlap;
  }
  return ranges == 0 ? 0.0 : total / static_cast<double>(ranges);
}

inline double range_precision(const std::vector<int>& real, const std::vector<int>& pred) {
  return range_recall(pred, real, 0.0);
}

struct SweepResult {
  double f1 = 0.0, threshold = 0.0, precision = 0.0, recall = 0.0;
};

// Brute-force sweep over thresholds lo + (hi − lo)·i/(count + 1).
inline SweepResult best_f1(const std::vector<double>& scores, const std::vector<int>& truth, std::size_t count) {
  const double lo = *std::min_element(scores.begin(), scores.end());
  const double hi = *std::max_element(scores.begin(), scores.end());
  SweepResult best;
  bool first = true;
  if (!(hi > lo)) return best;
  for (std::size_t i = 1; i <= count; ++i) {
    const double theta = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count + 1);
    std::vector<int> pred(scores.size());
    for (std::size_t t = 0; t < scores.size(); ++t) pred[t] = scores[t] >= theta;
    const double r = range_recall(truth, pred, 0.0);
    const double p = range_precision(truth, pred);
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    if (first || f > best.f1) best = {f, theta, p, r};
    first = false;
  }
  return best;
}

// Local outlier factor by exhaustive search on per-column standardized data.
// Neighbors are the k nearest training rows (ties by index); training rows
// queried again count themselves.
inline double lof(const std::vector<std::vector<double>>& train, const std::vector<double>& query, std::size_t k) {
  const std::size_t n = train.size(), dim = query.size();
  std::vector<double> mu(dim, 0.0), sd(dim, 0.0);
  for (const auto& row : train)
    for (std::size_t j = 0; j < dim; ++j) mu[j] += row[j] / static_cast<double>(n);
  for (const auto& row : train)
    for (std::size_t j = 0; j < dim; ++j) sd[j] += (row[j] - mu[j]) * (row[j] - mu[j]) / static_cast<double>(n);
  for (auto& s : sd) s = s > 1e-24 ? std::sqrt(s) : 1.0;
  auto z = [&](const std::vector<double>& v) {
    std::vector<double> out(dim);
    for (std::size_t j = 0; j < dim; ++j) out[j] = (v[j] - mu[j]) / sd[j];
    return out;
  };
  std::vector<std::vector<double>> zt;
  for (const auto& row : train) zt.push_back(z(row));
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < dim; ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  };
  auto knn = [&](const std::vector<double>& p, std::ptrdiff_t exclude) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t i = 0; i < n; ++i) {
      if (static_cast<std::ptrdiff_t>(i) == exclude) continue;
      d.emplace_back(dist(p, zt[i]), i);
    }
    std::sort(d.begin(), d.end());
    d.resize(k);
    return d;
  };
  std::vector<double> kdist(n);
  std::vector<std::vector<std::pair<double, std::size_t>>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    nb[i] = knn(zt[i], static_cast<std::ptrdiff_t>(i));
    kdist[i] = nb[i].back().first;
  }
  auto lrd_of = [&](const std::vector<std::pair<double, std::size_t>>& nbs) {
    double reach = 0.0;
    for (const auto& [d, o] : nbs) reach += std::max(d, kdist[o]);
    reach /= static_cast<double>(k);
    return 1.0 / std::max(reach, 1e-12);
  };
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) lrd[i] = lrd_of(nb[i]);
  const auto qn = knn(z(query), -1);
  const double own = lrd_of(qn);
  double ratio = 0.0;
  for (const auto& [d, o] : qn) ratio += lrd[o] / own;
  return ratio / static_cast<double>(k);
}

// Spectral residual score of the last point of `w` via an O(n²) DFT.
inline double spectral_residual_last(const std::vector<double>& w, std::size_t q, std::size_t pos) {
  const std::size_t n = w.size();
  using C = std::complex<double>;
  std::vector<C> X(n);
  for (std::size_t f = 0; f < n; ++f) {
    C acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += w[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(f * t % n) / static_cast<double>(n));
    }
    X[f] = acc;
  }
  std::vector<double> L(n);
  for (std::size_t f = 0; f < n; ++f) L[f] = std::log(std::abs(X[f]) + 1e-8);
  std::vector<C> Y(n);
  const long half = static_cast<long>(q / 2);
  for (std::size_t f = 0; f < n; ++f) {
    double avg = 0.0;
    for (long o = -half; o <= half; ++o) {
      const long idx = ((static_cast<long>(f) + o) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
      avg += L[static_cast<std::size_t>(idx)];
    }
    avg /= static_cast<double>(q);
    Y[f] = std::polar(std::exp(L[f] - avg), std::arg(X[f]));
  }
  std::vector<double> sal(n);
  for (std::size_t t = 0; t < n; ++t) {
    C acc = 0.0;
    for (std::size_t f = 0; f < n; ++f) {
      acc += Y[f] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(f * t % n) / static_cast<double>(n));
    }
    sal[t] = std::abs(acc / static_cast<double>(n));
  }
  double local = 0.0;
  for (std::size_t t = 0; t < pos; ++t) local += sal[t];
  local /= static_cast<double>(pos);
  return std::max(0.0, (sal[pos] - local) / (local + 1e-8));
}

// Central-difference gradient of f over `count` coordinates accessed via `at`.
inline std::vector<double> numeric_gradient(const std::function<double()>& f,
                                            const std::function<double&(std::size_t)>& at,
                                            const std::vector<std::size_t>& coords, double h = 1e-6) {
  std::vector<double> g;
  for (std::size_t i : coords) {
    double& v = at(i);
    const double saved = v;
    v = saved + h;
    const double up = f();
    v = saved - h;
    const double down = f();
    v = saved;
    g.push_back((up - down) / (2.0 * h));
  }
  return g;
}

// ‖a − b‖ / max(‖a‖, ‖b‖, tiny).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
}

// Percentile by linear interpolation between order statistics.
inline double percentile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace oracle
