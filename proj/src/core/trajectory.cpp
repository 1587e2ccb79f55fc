#include "fslam/core/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace fslam {

std::vector<std::pair<std::size_t, std::size_t>> associateByTimestamp(
    const Trajectory& estimate, const Trajectory& reference, double tolerance_s) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (estimate.empty() || reference.empty()) return pairs;

  // Both trajectories are time-ordered; sweep with a moving reference cursor
  // and keep only the best reference per estimate, one-to-one.
  std::size_t j = 0;
  long last_ref = -1;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const double t = estimate.points[i].timestamp;
    while (j + 1 < reference.size() &&
           std::abs(reference.points[j + 1].timestamp - t) <=
               std::abs(reference.points[j].timestamp - t)) {
      ++j;
    }
    if (std::abs(reference.points[j].timestamp - t) <= tolerance_s &&
        static_cast<long>(j) > last_ref) {
      pairs.emplace_back(i, j);
      last_ref = static_cast<long>(j);
    }
  }
  return pairs;
}

Trajectory transformed(const Trajectory& traj, const SimTransform& S) {
  Trajectory out = traj;
  for (auto& p : out.points) {
    p.pose.t = S * p.pose.t;
    p.pose.R = S.R * p.pose.R;
  }
  return out;
}

}  // namespace fslam
