#pragma once

#include <Eigen/Core>

#include "fslam/core/camera.hpp"
#include "fslam/core/pose.hpp"

namespace fslam {

/// sigma-normalized reprojection residual r = (pi(R*X + t) - obs) / sigma.
/// Returns false (residual unusable) when the point is at or behind the
/// camera plane (z <= min_depth).
bool reprojectionResidual(const Pose& pose, const Eigen::Vector3d& point,
                          const CameraIntrinsics& K, const Eigen::Vector2d& obs, double sigma,
                          Eigen::Vector2d& residual, double min_depth = 1e-9);

/// Analytic Jacobians of the sigma-normalized residual. Pose increment is
/// right-multiplicative on rotation with additive translation:
///   R <- R * exp(skew(w)),  t <- t + dt,  parameters ordered [w, dt].
/// J_pose is 2x6, J_point is 2x3 (w.r.t. the world point). Returns false
/// behind the camera.
bool reprojectionJacobians(const Pose& pose, const Eigen::Vector3d& point,
                           const CameraIntrinsics& K, double sigma,
                           Eigen::Matrix<double, 2, 6>& J_pose, Eigen::Matrix<double, 2, 3>& J_point,
                           double min_depth = 1e-9);

/// Applies the increment convention above.
Pose applyPoseIncrement(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta);

/// Huber robust cost and IRLS weight for a squared residual norm e = ||r||^2.
/// cost(e) = e when sqrt(e) <= delta, else 2*delta*sqrt(e) - delta^2.
struct RobustTerm {
  double cost = 0.0;
  double weight = 1.0;
};
RobustTerm huber(double squared_norm, double delta);

}  // namespace fslam
