#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "fslam/core/camera.hpp"
#include "fslam/core/pose.hpp"

namespace fslam {

struct RansacConfig {
  int max_iterations = 200;
  double inlier_threshold = 1e-3;  // Sampson distance in normalized image coordinates
  double min_inlier_ratio = 0.5;
  std::uint64_t seed = 1;
};

enum class TwoViewStatus { Ok, InsufficientMatches, NoConsensus, DegenerateConfiguration };

struct TwoViewResult {
  TwoViewStatus status = TwoViewStatus::InsufficientMatches;
  /// Relative pose T_21 (first camera frame to second camera frame), |t| = 1.
  Pose relative;
  Eigen::Matrix3d essential = Eigen::Matrix3d::Zero();
  std::vector<char> inliers;
  int inlier_count = 0;

  bool ok() const { return status == TwoViewStatus::Ok; }
};

/// A pixel correspondence between two views.
struct PixelMatch {
  Eigen::Vector2d p1;
  Eigen::Vector2d p2;
};

/// Normalized eight-point essential matrix estimation inside RANSAC, followed
/// by decomposition and a cheirality test over the triangulated inliers.
/// Monocular scale is unobservable, so the translation is returned at unit
/// norm. Deterministic for a fixed RansacConfig::seed.
TwoViewResult estimateTwoView(const std::vector<PixelMatch>& matches, const CameraIntrinsics& K,
                              const RansacConfig& cfg = {});

/// First-order (Sampson) epipolar distance in normalized coordinates.
double sampsonDistance(const Eigen::Matrix3d& E, const Eigen::Vector2d& x1,
                       const Eigen::Vector2d& x2);

}  // namespace fslam
