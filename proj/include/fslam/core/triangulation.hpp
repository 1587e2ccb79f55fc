#pragma once

#include <Eigen/Core>

#include "fslam/core/camera.hpp"
#include "fslam/core/pose.hpp"

namespace fslam {

enum class TriangulationStatus { Ok, DegenerateBaseline, LowParallax, BehindCamera };

struct TriangulationResult {
  TriangulationStatus status = TriangulationStatus::DegenerateBaseline;
  Landmark point = Landmark::Zero();
  double parallax_deg = 0.0;

  bool ok() const { return status == TriangulationStatus::Ok; }
};

struct TriangulationOptions {
  double min_baseline = 1e-12;
  double min_parallax_deg = 1.0;
  bool require_positive_depth = true;
};

/// Linear (DLT) triangulation of a point seen in two views. Observations are
/// pixel coordinates; poses are world-to-camera. Degenerate baselines and
/// low-parallax ray pairs are rejected rather than returned.
TriangulationResult triangulate(const Eigen::Vector2d& obs1, const Eigen::Vector2d& obs2,
                                const Pose& pose1, const Pose& pose2, const CameraIntrinsics& K,
                                const TriangulationOptions& opts = {});

/// Parallax angle (degrees) between the two observation rays of a point.
double parallaxDeg(const Landmark& point, const Pose& pose1, const Pose& pose2);

}  // namespace fslam
