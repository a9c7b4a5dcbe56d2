#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "ymir/matrix.hpp"

namespace ymir::detectors {

/// Average unsuccessful-search path length of a BST on m points:
/// c(m) = 2·H(m−1) − 2(m−1)/m, with c(0) = c(1) = 0.
double average_path_length(std::size_t m);

struct IsolationForestParams {
  std::size_t trees = 100;
  std::size_t subsample = 256;  // capped at the training size
};

class IsolationForest {
 public:
  struct Node {
    int attribute = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::size_t size = 0;  // training points that reached the node
  };
  using Tree = std::vector<Node>;  // root at index 0

  /// Throws ParameterError when the effective subsample is below 2.
  static IsolationForest fit(const Matrix& points, IsolationForestParams params, std::uint64_t seed);

  /// Path length through one tree including the c(size) credit at the leaf.
  double path_length(const Tree& tree, std::span<const double> x) const;
  /// 2^(−E[h(x)] / c(ψ)), in (0, 1).
  double score(std::span<const double> x) const;

  std::size_t subsample() const { return subsample_; }
  const std::vector<Tree>& trees() const { return trees_; }

  nlohmann::json to_json() const;
  static IsolationForest from_json(const nlohmann::json& j);

 private:
  std::size_t subsample_ = 0;
  std::vector<Tree> trees_;
};

/// Local outlier factor against a fixed training set, brute-force neighbors
/// on per-metric standardized coordinates. Queries are never matched against
/// themselves, so a training row scored again counts its own copy.
class LocalOutlierFactor {
 public:
  static constexpr double kDistanceFloor = 1e-12;

  /// Throws ParameterError when neighbors ≥ training size or neighbors == 0.
  static LocalOutlierFactor fit(const Matrix& train, std::size_t neighbors);

  double lof(std::span<const double> query) const;
  /// max(LOF − 1, 0).
  double score(std::span<const double> query) const;

  std::size_t neighbors() const { return k_; }

  nlohmann::json to_json() const;
  static LocalOutlierFactor from_json(const nlohmann::json& j);

 private:
  struct Neighbor {
    double distance;
    std::size_t index;
  };
  std::vector<Neighbor> nearest(std::span<const double> standardized, std::ptrdiff_t exclude) const;
  std::vector<double> standardize(std::span<const double> x) const;
  void compute_densities();

  std::size_t k_ = 0;
  std::vector<double> mean_;
  std::vector<double> scale_;
  Matrix points_;  // standardized training points
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

}  // namespace ymir::detectors
