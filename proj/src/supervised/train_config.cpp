#include "ymir/supervised/train_config.hpp"

#include <cmath>
#include <set>
#include <string>

#include "ymir/error.hpp"

namespace ymir::supervised {

void TrainConfig::validate() const {
  if (!(std::isfinite(learning_rate) && learning_rate > 0.0)) {
    throw ParameterError("learning_rate must be positive");
  }
  if (batch_size == 0) throw ParameterError("batch_size must be positive");
  if (epochs == 0) throw ParameterError("epochs must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ParameterError("momentum must lie in [0, 1)");
  if (!(epsilon_max >= 0.0 && epsilon_max < 0.5)) {
    throw ParameterError("epsilon_max must lie in [0, 0.5)");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ParameterError("threshold must lie in (0, 1]");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size},
          {"epochs", epochs},               {"momentum", momentum},
          {"seed", seed},                   {"epsilon_max", epsilon_max},
          {"threshold", threshold},         {"balance_classes", balance_classes}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParameterError("train config must be a JSON object");
  static const std::set<std::string> known = {"learning_rate", "batch_size", "epochs",
                                              "momentum",      "seed",       "epsilon_max",
                                              "threshold",     "balance_classes"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ParameterError("unknown train config key '" + key + "'");
  }
  TrainConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.momentum = j.value("momentum", c.momentum);
    c.seed = j.value("seed", c.seed);
    c.epsilon_max = j.value("epsilon_max", c.epsilon_max);
    c.threshold = j.value("threshold", c.threshold);
    c.balance_classes = j.value("balance_classes", c.balance_classes);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace ymir::supervised
