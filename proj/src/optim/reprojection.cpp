#include "fslam/optim/reprojection.hpp"

#include <cmath>

namespace fslam {

bool reprojectionResidual(const Pose& pose, const Eigen::Vector3d& point,
                          const CameraIntrinsics& K, const Eigen::Vector2d& obs, double sigma,
                          Eigen::Vector2d& residual, double min_depth) {
  const Eigen::Vector3d pc = pose.R * point + pose.t;
  if (pc.z() <= min_depth) return false;
  const double inv_z = 1.0 / pc.z();
  const double u = K.fx * pc.x() * inv_z + K.cx;
  const double v = K.fy * pc.y() * inv_z + K.cy;
  residual = Eigen::Vector2d(u - obs.x(), v - obs.y()) / sigma;
  return true;
}

bool reprojectionJacobians(const Pose& pose, const Eigen::Vector3d& point,
                           const CameraIntrinsics& K, double sigma,
                           Eigen::Matrix<double, 2, 6>& J_pose, Eigen::Matrix<double, 2, 3>& J_point,
                           double min_depth) {
  const Eigen::Vector3d pc = pose.R * point + pose.t;
  if (pc.z() <= min_depth) return false;

  const double inv_z = 1.0 / pc.z();
  const double inv_z2 = inv_z * inv_z;
  Eigen::Matrix<double, 2, 3> J_proj;
  J_proj << K.fx * inv_z, 0.0, -K.fx * pc.x() * inv_z2,  //
      0.0, K.fy * inv_z, -K.fy * pc.y() * inv_z2;
  J_proj /= sigma;

  // d(pc)/dw = -R*skew(X) under R <- R*exp(skew(w)); d(pc)/dt = I.
  J_pose.block<2, 3>(0, 0) = J_proj * (-pose.R * skew(point));
  J_pose.block<2, 3>(0, 3) = J_proj;
  J_point = J_proj * pose.R;
  return true;
}

Pose applyPoseIncrement(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  Pose out;
  // Re-project onto SO(3): right-multiplying can never remove an orthogonality
  // defect already present in R, and pose prediction amplifies such a defect
  // geometrically (transpose-as-inverse doubles it per composition).
  out.R = projectToSO3(pose.R * expSO3(delta.head<3>()));
  out.t = pose.t + delta.tail<3>();
  return out;
}

RobustTerm huber(double squared_norm, double delta) {
  RobustTerm term;
  const double norm = std::sqrt(squared_norm);
  if (norm <= delta) {
    term.cost = squared_norm;
    term.weight = 1.0;
  } else {
    term.cost = 2.0 * delta * norm - delta * delta;
    term.weight = norm > 0.0 ? delta / norm : 1.0;
  }
  return term;
}

}  // namespace fslam
