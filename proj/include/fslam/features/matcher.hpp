#pragma once

#include <vector>

#include "fslam/features/types.hpp"

namespace fslam {

enum class MatchMode { Strict, Relaxed };

struct Match {
  int a = -1;
  int b = -1;
  double distance = 0.0;
};

/// Nearest/second-nearest matching under the variant's metric. A pair is
/// accepted when, in both directions, the nearest distance passes the mode's
/// gate (th_low strict, th_high relaxed) and the ratio test against the
/// second-nearest. Mutual-best filtering makes the result one-to-one and
/// symmetric under argument swap. Throws DescriptorError on variant mismatch.
std::vector<Match> matchDescriptors(const DescriptorSet& a, const DescriptorSet& b,
                                    const MatchThresholds& th, MatchMode mode);

}  // namespace fslam
