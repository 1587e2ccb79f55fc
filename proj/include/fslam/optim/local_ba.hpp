#pragma once

#include <Eigen/Core>
#include <vector>

#include "fslam/core/camera.hpp"
#include "fslam/core/pose.hpp"

namespace fslam {

struct LocalBaOptions {
  int stage1_iterations = 5;
  int stage2_iterations = 10;  // after outlier removal
  double huber_delta = 2.45;
  double chi2_threshold = 5.991;
};

struct BaObservation {
  int camera = 0;  // index into poses, or fixed_poses when fixed_camera
  bool fixed_camera = false;
  int point = 0;
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
  double sigma = 1.0;
};

/// Poses and points are optimized in place; fixed_poses are anchors and are
/// never modified.
struct LocalBaProblem {
  CameraIntrinsics K;
  std::vector<Pose> poses;
  std::vector<Pose> fixed_poses;
  std::vector<Eigen::Vector3d> points;
  std::vector<BaObservation> observations;
};

struct LocalBaResult {
  std::vector<char> active;  // per observation, after outlier removal
  int removed = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  /// Per optimization stage: robust objective at stage start then after each
  /// accepted LM step; each sequence is non-increasing.
  std::vector<std::vector<double>> stage_costs;
};

/// Joint Huber-robust bundle adjustment over the given poses and points with
/// Levenberg-Marquardt; the normal equations are reduced by a Schur
/// complement on the 3x3 point blocks. Two stages: stage-1 iterations, then
/// chi2 outlier removal, then stage-2 iterations.
LocalBaResult solveLocalBa(LocalBaProblem& problem, const LocalBaOptions& options = {});

}  // namespace fslam
