#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "fslam/core/camera.hpp"
#include "fslam/core/pose.hpp"

namespace fslam {

struct MotionOnlyOptions {
  int rounds = 4;         // outlier re-classification rounds
  int iterations = 10;    // LM iterations per round
  double huber_delta = 2.45;
  double chi2_threshold = 5.991;  // on the sigma-normalized squared residual
  int min_inliers = 15;
};

struct MotionOnlyResult {
  Pose pose;
  std::vector<char> inliers;  // one flag per observation
  int inlier_count = 0;
  bool lost = false;  // inlier_count < min_inliers
  double final_cost = 0.0;
  /// Per round: robust objective at round start followed by the value after
  /// every accepted LM step. Each inner sequence is non-increasing (the
  /// active set is fixed within a round).
  std::vector<std::vector<double>> round_costs;
};

/// 6-DoF pose refinement against fixed landmarks: minimize the Huber-robust
/// sum of sigma-normalized squared reprojection errors with
/// Levenberg-Marquardt, re-classifying observations against chi2_threshold
/// between rounds. points/observations/sigmas are parallel arrays.
MotionOnlyResult optimizePose(const Pose& initial, std::span<const Eigen::Vector3d> points,
                              std::span<const Eigen::Vector2d> observations,
                              std::span<const double> sigmas, const CameraIntrinsics& K,
                              const MotionOnlyOptions& options = {});

}  // namespace fslam
