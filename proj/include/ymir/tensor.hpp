#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace ymir {

/// Named parameter tensor stored flat in row-major order.
struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;

  static Tensor zeros(std::string name, std::vector<std::size_t> shape);
  std::size_t size() const { return values.size(); }

  bool operator==(const Tensor&) const = default;
};

/// Ordered parameter collection. Order is part of the persisted format.
struct ParamSet {
  std::vector<Tensor> tensors;

  std::size_t total_size() const;
  bool all_finite() const;
  /// Same names and shapes, all values zero.
  ParamSet zeros_like() const;

  Tensor& operator[](std::size_t i) { return tensors[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors[i]; }

  /// Flat views used by optimizers and gradient checks.
  double& flat(std::size_t i);
  double flat(std::size_t i) const;

  nlohmann::json to_json() const;
  /// Throws ShapeError if the document's names or shapes differ from `layout`.
  static ParamSet from_json(const nlohmann::json& j, const ParamSet& layout);

  bool operator==(const ParamSet&) const = default;
};

}  // namespace ymir
