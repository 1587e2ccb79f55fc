#pragma once

#include <Eigen/Core>

#include "fslam/core/pose.hpp"

namespace fslam {

/// A triangulated 3-D landmark position in scene units.
using Landmark = Eigen::Vector3d;

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  bool isValid() const {
    return fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 && cx < width &&
           cy >= 0.0 && cy < height;
  }

  Eigen::Matrix3d K() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx;
    k(1, 1) = fy;
    k(0, 2) = cx;
    k(1, 2) = cy;
    return k;
  }

  /// Pixel to normalized image coordinates.
  Eigen::Vector2d normalize(const Eigen::Vector2d& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy};
  }
};

enum class ProjectionStatus { Ok, BehindCamera, OutOfView };

struct Projection {
  ProjectionStatus status = ProjectionStatus::BehindCamera;
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
  double depth = 0.0;

  bool ok() const { return status == ProjectionStatus::Ok; }
};

/// Pinhole projection of a world point. Behind-camera (z <= 0) and
/// out-of-view are reported as distinct non-fatal outcomes; uv is filled for
/// out-of-view points as well.
Projection project(const Landmark& point, const Pose& pose, const CameraIntrinsics& K);

/// Projection of a point already expressed in camera coordinates.
Projection projectCamera(const Eigen::Vector3d& pc, const CameraIntrinsics& K);

}  // namespace fslam
