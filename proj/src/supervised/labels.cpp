#include "ymir/supervised/labels.hpp"

#include "ymir/error.hpp"

namespace ymir::supervised {

std::vector<int> make_pseudo_labels(const ensemble::UnsupervisedResult& result, double threshold,
                                    std::size_t length) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ParameterError("pseudo-label threshold must lie in (0, 1]");
  }
  std::vector<int> labels(length, 0);
  for (const auto& [t, confidence] : result.confidence) {
    if (t < length && confidence > threshold) labels[t] = 1;
  }
  return labels;
}

FusedLabels fuse_labels(std::span<const int> pseudo, const LabelSeries& user) {
  if (pseudo.size() != user.length()) {
    throw ShapeError("pseudo labels have length " + std::to_string(pseudo.size()) +
                     ", user labels " + std::to_string(user.length()));
  }
  FusedLabels fused;
  const std::size_t T = pseudo.size();
  fused.hard.assign(pseudo.begin(), pseudo.end());
  fused.source.assign(T, LabelSource::kPseudo);
  std::size_t user_count = 0;
  for (std::size_t t = 0; t < T; ++t) {
    if (!user.mask[t]) continue;
    fused.hard[t] = user.labels[t];
    fused.source[t] = LabelSource::kUser;
    ++user_count;
  }
  fused.rho = T == 0 ? 0.0 : static_cast<double>(user_count) / static_cast<double>(T);
  fused.targets.assign(fused.hard.begin(), fused.hard.end());
  return fused;
}

std::vector<double> smooth_targets(const FusedLabels& fused, double epsilon_max) {
  if (!(epsilon_max >= 0.0 && epsilon_max < 0.5)) {
    throw ParameterError("epsilon_max must lie in [0, 0.5)");
  }
  const double eps = epsilon_max * (1.0 - fused.rho);
  std::vector<double> targets(fused.hard.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    targets[t] = fused.hard[t] * (1.0 - eps) + eps / 2.0;
  }
  return targets;
}

}  // namespace ymir::supervised
