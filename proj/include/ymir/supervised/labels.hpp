#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ymir/core/timeseries.hpp"
#include "ymir/ensemble/ensemble.hpp"

namespace ymir::supervised {

enum class LabelSource : std::uint8_t { kPseudo, kUser };

/// Training labels after pseudo-labeling and user overrides.
struct FusedLabels {
  std::vector<int> hard;
  std::vector<LabelSource> source;
  double rho = 0.0;  // share of user-labeled points
  std::vector<double> targets;
};

/// 1 where the unsupervised path flagged t with confidence above `threshold`.
std::vector<int> make_pseudo_labels(const ensemble::UnsupervisedResult& result, double threshold,
                                    std::size_t length);

/// User labels replace pseudo labels wherever the mask is set. Targets are
/// left equal to the hard labels; call smooth_targets to soften them.
FusedLabels fuse_labels(std::span<const int> pseudo, const LabelSeries& user);

/// ε = epsilon_max·(1 − ρ); target = hard·(1 − ε) + ε/2.
std::vector<double> smooth_targets(const FusedLabels& fused, double epsilon_max);

}  // namespace ymir::supervised
