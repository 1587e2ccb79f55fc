#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fslam {

/// Rigid transform mapping world coordinates to camera coordinates:
/// x_cam = R * x_world + t. All poses in the engine follow this convention;
/// trajectory emission converts to camera-to-world at the file boundary.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Pose() = default;
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : R(rotation), t(translation) {}

  static Pose Identity() { return Pose(); }

  Pose inverse() const { return Pose(R.transpose(), -(R.transpose() * t)); }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return R * p + t; }

  /// Camera center expressed in world coordinates.
  Eigen::Vector3d center() const { return -(R.transpose() * t); }

  /// Orthonormality and determinant check within tol.
  bool isValid(double tol = 1e-9) const;
};

/// compose(a, b): the transform applying b first, then a.
inline Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.R * b.R, a.R * b.t + a.t);
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues exponential, axis-angle vector to rotation matrix.
Eigen::Matrix3d expSO3(const Eigen::Vector3d& w);

/// Logarithm of a rotation matrix, robust near 0 and pi.
Eigen::Vector3d logSO3(const Eigen::Matrix3d& R);

/// Nearest rotation matrix in Frobenius norm (SVD projection).
Eigen::Matrix3d projectToSO3(const Eigen::Matrix3d& M);

/// Rotation angle in radians, in [0, pi].
double rotationAngle(const Eigen::Matrix3d& R);

/// 7-DoF similarity: x -> s * R * x + t. Same direction convention as Pose
/// when used as a world-to-camera transform.
struct SimTransform {
  double s = 1.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  SimTransform() = default;
  SimTransform(double scale, const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : s(scale), R(rotation), t(translation) {}

  static SimTransform Identity() { return SimTransform(); }
  static SimTransform fromPose(const Pose& T, double scale = 1.0) {
    return SimTransform(scale, T.R, T.t);
  }

  /// SE(3) pose with the scale folded into the translation (t / s).
  Pose toPose() const { return Pose(R, t / s); }

  SimTransform inverse() const {
    return SimTransform(1.0 / s, R.transpose(), -(R.transpose() * t) / s);
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const { return s * (R * p) + t; }
};

inline SimTransform compose(const SimTransform& a, const SimTransform& b) {
  return SimTransform(a.s * b.s, a.R * b.R, a.s * (a.R * b.t) + a.t);
}

/// Tangent vector layout: [upsilon (3), omega (3), sigma (1)].
using Sim3Tangent = Eigen::Matrix<double, 7, 1>;

SimTransform expSim3(const Sim3Tangent& v);
Sim3Tangent logSim3(const SimTransform& S);

}  // namespace fslam
