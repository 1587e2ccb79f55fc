#pragma once

#include <vector>

#include "fslam/core/pose.hpp"

namespace fslam {

/// One trajectory sample. Poses are camera-to-world (T_wc), the convention of
/// the trajectory file formats; the pose translation is the camera position.
struct TrajectoryPoint {
  double timestamp = 0.0;
  Pose pose;  // camera-to-world
  long frame_id = -1;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  Eigen::Vector3d position(std::size_t i) const { return points[i].pose.t; }

  /// Timestamps must be strictly increasing.
  bool isValid() const {
    for (std::size_t i = 1; i < points.size(); ++i)
      if (points[i].timestamp <= points[i - 1].timestamp) return false;
    return true;
  }
};

/// Index pairs (into estimate, reference) associated by nearest timestamp.
std::vector<std::pair<std::size_t, std::size_t>> associateByTimestamp(
    const Trajectory& estimate, const Trajectory& reference, double tolerance_s = 0.01);

/// Apply a similarity to every pose of a trajectory (camera-to-world side):
/// position -> s*R*p + t, orientation -> R * R_wc.
Trajectory transformed(const Trajectory& traj, const SimTransform& S);

}  // namespace fslam
