#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>

#include "fslam/features/types.hpp"

namespace fslam {

/// A triangulated landmark. Observations map keyframe id -> keypoint index in
/// that keyframe. The representative descriptor is a copy of the observation
/// descriptor with minimal median distance to all the others.
struct MapPoint {
  std::uint64_t id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::map<std::uint64_t, int> observations;
  DescriptorSet descriptor;  // 0 or 1 rows
  Eigen::Vector3d view_normal = Eigen::Vector3d::UnitZ();
  std::uint64_t first_keyframe = 0;  // creation keyframe, for the culling window

  // Tracking statistics: how often the point fell in a frustum (visible) vs.
  // how often it was actually matched (found).
  int visible = 1;
  int found = 1;

  // Ground-truth landmark id for synthetic sequences; -1 on real data.
  std::int64_t truth_id = -1;

  int observationCount() const { return static_cast<int>(observations.size()); }
  double foundRatio() const { return visible > 0 ? static_cast<double>(found) / visible : 0.0; }
};

}  // namespace fslam
