#include <algorithm>
#include <cmath>
#include <numeric>

#include "ymir/detectors/isolation_forest.hpp"
#include "ymir/error.hpp"
#include "ymir/rng.hpp"

namespace ymir::detectors {

double average_path_length(std::size_t m) {
  if (m <= 1) return 0.0;
  double harmonic = 0.0;
  for (std::size_t j = 1; j < m; ++j) harmonic += 1.0 / static_cast<double>(j);
  const double md = static_cast<double>(m);
  return 2.0 * harmonic - 2.0 * (md - 1.0) / md;
}

namespace {

struct TreeBuilder {
  const Matrix& points;
  std::size_t depth_limit;
  Rng& rng;
  IsolationForest::Tree nodes;

  int build(std::vector<std::size_t>& idx, std::size_t depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[static_cast<std::size_t>(id)].size = idx.size();
    if (depth >= depth_limit || idx.size() <= 1) return id;

    std::vector<std::size_t> splittable;
    std::vector<std::pair<double, double>> ranges(points.cols);
    for (std::size_t a = 0; a < points.cols; ++a) {
      double lo = points(idx[0], a);
      double hi = lo;
      for (std::size_t i : idx) {
        lo = std::min(lo, points(i, a));
        hi = std::max(hi, points(i, a));
      }
      ranges[a] = {lo, hi};
      if (lo < hi) splittable.push_back(a);
    }
    if (splittable.empty()) return id;

    const std::size_t attribute = splittable[rng.uniform_index(splittable.size())];
    const auto [lo, hi] = ranges[attribute];
    const double split = rng.uniform(lo, hi);
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : idx) (points(i, attribute) < split ? left : right).push_back(i);

    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& node = nodes[static_cast<std::size_t>(id)];
    node.attribute = static_cast<int>(attribute);
    node.split = split;
    node.left = l;
    node.right = r;
    return id;
  }
};

}  // namespace

IsolationForest IsolationForest::fit(const Matrix& points, IsolationForestParams params,
                                     std::uint64_t seed) {
  const std::size_t psi = std::min(params.subsample, points.rows);
  if (psi < 2) throw ParameterError("isolation_forest subsample must be at least 2");
  if (params.trees == 0) throw ParameterError("isolation_forest needs at least one tree");

  IsolationForest forest;
  forest.subsample_ = psi;
  const auto depth_limit = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));
  Rng rng(seed);
  std::vector<std::size_t> all(points.rows);
  for (std::size_t t = 0; t < params.trees; ++t) {
    std::iota(all.begin(), all.end(), std::size_t{0});
    // Partial Fisher-Yates: the first psi entries are a uniform subsample.
    for (std::size_t i = 0; i < psi; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(all.size() - i));
      std::swap(all[i], all[j]);
    }
    std::vector<std::size_t> sample(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(psi));
    TreeBuilder builder{points, depth_limit, rng, {}};
    builder.build(sample, 0);
    forest.trees_.push_back(std::move(builder.nodes));
  }
  return forest;
}

double IsolationForest::path_length(const Tree& tree, std::span<const double> x) const {
  std::size_t node = 0;
  double depth = 0.0;
  while (tree[node].attribute >= 0) {
    const auto& n = tree[node];
    node = static_cast<std::size_t>(x[static_cast<std::size_t>(n.attribute)] < n.split ? n.left : n.right);
    depth += 1.0;
  }
  return depth + average_path_length(tree[node].size);
}

double IsolationForest::score(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& tree : trees_) total += path_length(tree, x);
  const double expected = total / static_cast<double>(trees_.size());
  return std::exp2(-expected / average_path_length(subsample_));
}

nlohmann::json IsolationForest::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree) nodes.push_back({n.attribute, n.split, n.left, n.right, n.size});
    trees.push_back(std::move(nodes));
  }
  return {{"subsample", subsample_}, {"trees", std::move(trees)}};
}

IsolationForest IsolationForest::from_json(const nlohmann::json& j) {
  IsolationForest forest;
  forest.subsample_ = j.at("subsample").get<std::size_t>();
  for (const auto& nodes : j.at("trees")) {
    Tree tree;
    for (const auto& n : nodes) {
      tree.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                      n.at(3).get<int>(), n.at(4).get<std::size_t>()});
    }
    if (tree.empty()) throw ShapeError("isolation tree without nodes");
    forest.trees_.push_back(std::move(tree));
  }
  if (forest.trees_.empty() || forest.subsample_ < 2) throw ShapeError("invalid isolation forest state");
  return forest;
}

LocalOutlierFactor LocalOutlierFactor::fit(const Matrix& train, std::size_t neighbors) {
  if (neighbors == 0) throw ParameterError("lof needs at least one neighbor");
  if (neighbors >= train.rows) {
    throw ParameterError("lof k_neighbors=" + std::to_string(neighbors) + " needs at least " +
                         std::to_string(neighbors + 1) + " training points");
  }
  LocalOutlierFactor lof;
  lof.k_ = neighbors;
  const std::size_t n = train.cols;
  lof.mean_.assign(n, 0.0);
  lof.scale_.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = train.column(j);
    double m = 0.0;
    for (double v : col) m += v;
    m /= static_cast<double>(col.size());
    double ss = 0.0;
    for (double v : col) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(col.size()));
    lof.mean_[j] = m;
    lof.scale_[j] = sd > 0.0 ? sd : 1.0;
  }
  lof.points_ = Matrix(train.rows, n);
  for (std::size_t i = 0; i < train.rows; ++i) {
    const auto z = lof.standardize(train.row(i));
    std::copy(z.begin(), z.end(), lof.points_.row(i).begin());
  }
  lof.compute_densities();
  return lof;
}

std::vector<double> LocalOutlierFactor::standardize(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean_[j]) / scale_[j];
  return z;
}

std::vector<LocalOutlierFactor::Neighbor> LocalOutlierFactor::nearest(std::span<const double> z,
                                                                      std::ptrdiff_t exclude) const {
  std::vector<Neighbor> all;
  all.reserve(points_.rows);
  for (std::size_t i = 0; i < points_.rows; ++i) {
    if (static_cast<std::ptrdiff_t>(i) == exclude) continue;
    const auto p = points_.row(i);
    double ss = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) ss += (p[j] - z[j]) * (p[j] - z[j]);
    all.push_back({ss, i});
  }
  const auto closer = [](const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k_), all.end(), closer);
  all.resize(k_);
  for (auto& nb : all) nb.distance = std::sqrt(nb.distance);
  return all;
}

void LocalOutlierFactor::compute_densities() {
  const std::size_t N = points_.rows;
  std::vector<std::vector<Neighbor>> hood(N);
  k_distance_.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    hood[i] = nearest(points_.row(i), static_cast<std::ptrdiff_t>(i));
    k_distance_[i] = hood[i].back().distance;
  }
  lrd_.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double reach = 0.0;
    for (const auto& nb : hood[i]) reach += std::max(k_distance_[nb.index], nb.distance);
    lrd_[i] = 1.0 / std::max(reach / static_cast<double>(k_), kDistanceFloor);
  }
}

double LocalOutlierFactor::lof(std::span<const double> query) const {
  const auto z = standardize(query);
  const auto hood = nearest(z, -1);
  double reach = 0.0;
  double neighbor_density = 0.0;
  for (const auto& nb : hood) {
    reach += std::max(k_distance_[nb.index], nb.distance);
    neighbor_density += lrd_[nb.index];
  }
  const double k = static_cast<double>(k_);
  const double own_density = 1.0 / std::max(reach / k, kDistanceFloor);
  return neighbor_density / k / own_density;
}

double LocalOutlierFactor::score(std::span<const double> query) const {
  return std::max(lof(query) - 1.0, 0.0);
}

nlohmann::json LocalOutlierFactor::to_json() const {
  return {{"neighbors", k_},     {"mean", mean_},          {"scale", scale_},
          {"rows", points_.rows}, {"points", points_.data}, {"k_distance", k_distance_},
          {"lrd", lrd_}};
}

LocalOutlierFactor LocalOutlierFactor::from_json(const nlohmann::json& j) {
  LocalOutlierFactor lof;
  lof.k_ = j.at("neighbors").get<std::size_t>();
  lof.mean_ = j.at("mean").get<std::vector<double>>();
  lof.scale_ = j.at("scale").get<std::vector<double>>();
  const auto rows = j.at("rows").get<std::size_t>();
  lof.points_.rows = rows;
  lof.points_.cols = lof.mean_.size();
  lof.points_.data = j.at("points").get<std::vector<double>>();
  lof.k_distance_ = j.at("k_distance").get<std::vector<double>>();
  lof.lrd_ = j.at("lrd").get<std::vector<double>>();
  if (lof.points_.data.size() != rows * lof.points_.cols || lof.k_distance_.size() != rows ||
      lof.lrd_.size() != rows || lof.scale_.size() != lof.mean_.size() || lof.k_ == 0 ||
      lof.k_ >= rows) {
    throw ShapeError("inconsistent lof state");
  }
  return lof;
}

}  // namespace ymir::detectors
