#include "fslam/core/triangulation.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace fslam {

double parallaxDeg(const Landmark& point, const Pose& pose1, const Pose& pose2) {
  const Eigen::Vector3d r1 = point - pose1.center();
  const Eigen::Vector3d r2 = point - pose2.center();
  const double denom = r1.norm() * r2.norm();
  if (denom < 1e-15) return 0.0;
  const double c = std::clamp(r1.dot(r2) / denom, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

TriangulationResult triangulate(const Eigen::Vector2d& obs1, const Eigen::Vector2d& obs2,
                                const Pose& pose1, const Pose& pose2, const CameraIntrinsics& K,
                                const TriangulationOptions& opts) {
  TriangulationResult out;
  if ((pose1.center() - pose2.center()).norm() < opts.min_baseline) {
    out.status = TriangulationStatus::DegenerateBaseline;
    return out;
  }

  Eigen::Matrix<double, 3, 4> P1, P2;
  P1.leftCols<3>() = K.K() * pose1.R;
  P1.col(3) = K.K() * pose1.t;
  P2.leftCols<3>() = K.K() * pose2.R;
  P2.col(3) = K.K() * pose2.t;

  Eigen::Matrix4d A;
  A.row(0) = obs1.x() * P1.row(2) - P1.row(0);
  A.row(1) = obs1.y() * P1.row(2) - P1.row(1);
  A.row(2) = obs2.x() * P2.row(2) - P2.row(0);
  A.row(3) = obs2.y() * P2.row(2) - P2.row(1);

  Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
  Eigen::Vector4d X = svd.matrixV().col(3);
  if (std::abs(X(3)) < 1e-15) {
    out.status = TriangulationStatus::DegenerateBaseline;
    return out;
  }
  out.point = X.head<3>() / X(3);

  out.parallax_deg = parallaxDeg(out.point, pose1, pose2);
  if (out.parallax_deg < opts.min_parallax_deg) {
    out.status = TriangulationStatus::LowParallax;
    return out;
  }
  if (opts.require_positive_depth &&
      ((pose1 * out.point).z() <= 0.0 || (pose2 * out.point).z() <= 0.0)) {
    out.status = TriangulationStatus::BehindCamera;
    return out;
  }
  out.status = TriangulationStatus::Ok;
  return out;
}

}  // namespace fslam
