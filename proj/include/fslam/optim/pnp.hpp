#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "fslam/core/camera.hpp"
#include "fslam/core/pose.hpp"

namespace fslam {

struct PnpOptions {
  int iterations = 200;
  double chi2_threshold = 5.991;  // gate on squared pixel error / sigma^2
  int min_inliers = 6;
  std::uint64_t seed = 1;
};

struct PnpResult {
  bool ok = false;
  Pose pose;
  std::vector<char> inliers;
  int inlier_count = 0;
};

/// Camera pose from 2D-3D correspondences: 6-point DLT estimation of the
/// projection matrix inside RANSAC, final refit on the consensus set.
/// points/pixels/sigmas are parallel arrays.
PnpResult solvePnpRansac(std::span<const Eigen::Vector3d> points,
                         std::span<const Eigen::Vector2d> pixels, std::span<const double> sigmas,
                         const CameraIntrinsics& K, const PnpOptions& options = {});

}  // namespace fslam
