#pragma once

#include <Eigen/Core>
#include <vector>

#include "fslam/core/pose.hpp"
#include "fslam/core/trajectory.hpp"

namespace fslam {

enum class AlignmentStatus { Ok, TooFewAssociations, CollinearDegenerate };

struct AlignmentResult {
  AlignmentStatus status = AlignmentStatus::TooFewAssociations;
  SimTransform transform;  // maps estimate positions onto the reference
  int association_count = 0;

  bool ok() const { return status == AlignmentStatus::Ok; }
};

struct AlignmentOptions {
  bool with_scale = true;
  double association_tolerance_s = 0.01;
  int min_associations = 3;
};

/// Closed-form least-squares similarity (or rigid transform when with_scale
/// is off) between two 3-D point sets: minimizes sum |s*R*p_i + t - q_i|^2.
AlignmentResult umeyamaAlignPoints(const std::vector<Eigen::Vector3d>& from,
                                   const std::vector<Eigen::Vector3d>& to,
                                   bool with_scale = true);

/// Trajectory alignment: associates by timestamp, then solves for the
/// similarity mapping estimate positions onto reference positions.
AlignmentResult umeyamaAlign(const Trajectory& estimate, const Trajectory& reference,
                             const AlignmentOptions& opts = {});

}  // namespace fslam
