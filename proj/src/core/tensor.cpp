#include "ymir/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "ymir/error.hpp"

namespace ymir {

Tensor Tensor::zeros(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  return Tensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.size();
  return n;
}

bool ParamSet::all_finite() const {
  for (const auto& t : tensors) {
    if (!std::all_of(t.values.begin(), t.values.end(), [](double v) { return std::isfinite(v); })) {
      return false;
    }
  }
  return true;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  out.tensors.reserve(tensors.size());
  for (const auto& t : tensors) out.tensors.push_back(Tensor::zeros(t.name, t.shape));
  return out;
}

double& ParamSet::flat(std::size_t i) {
  for (auto& t : tensors) {
    if (i < t.size()) return t.values[i];
    i -= t.size();
  }
  throw SizeError("flat parameter index out of range");
}

double ParamSet::flat(std::size_t i) const {
  return const_cast<ParamSet*>(this)->flat(i);
}

nlohmann::json ParamSet::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : tensors) {
    out.push_back({{"name", t.name}, {"shape", t.shape}, {"values", t.values}});
  }
  return out;
}

ParamSet ParamSet::from_json(const nlohmann::json& j, const ParamSet& layout) {
  if (!j.is_array() || j.size() != layout.tensors.size()) {
    throw ShapeError("parameter document has " + std::to_string(j.is_array() ? j.size() : 0) +
                     " tensors, expected " + std::to_string(layout.tensors.size()));
  }
  ParamSet out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& expected = layout.tensors[i];
    Tensor t{j[i].at("name").get<std::string>(), j[i].at("shape").get<std::vector<std::size_t>>(),
             j[i].at("values").get<std::vector<double>>()};
    if (t.name != expected.name || t.shape != expected.shape || t.size() != expected.size()) {
      throw ShapeError("tensor '" + t.name + "' does not match expected '" + expected.name + "'");
    }
    out.tensors.push_back(std::move(t));
  }
  return out;
}

}  // namespace ymir
