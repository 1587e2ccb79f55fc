#include "fslam/core/pose.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace fslam {

bool Pose::isValid(double tol) const {
  if (!R.allFinite() || !t.allFinite()) return false;
  if (((R * R.transpose()) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d expSO3(const Eigen::Vector3d& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Eigen::Matrix3d W = skew(w);
  if (theta < 1e-10) {
    return Eigen::Matrix3d::Identity() + W + 0.5 * W * W;
  }
  return Eigen::Matrix3d::Identity() + (std::sin(theta) / theta) * W +
         ((1.0 - std::cos(theta)) / theta2) * W * W;
}

Eigen::Vector3d logSO3(const Eigen::Matrix3d& R) {
  const double tr = R.trace();
  const double cos_theta = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  Eigen::Vector3d vee(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-7) {
    return 0.5 * vee;
  }
  if (theta > M_PI - 1e-5) {
    // Near pi the vee part vanishes; recover the axis from R + I = 2*n*n^T + O(pi - theta).
    Eigen::Matrix3d A = R + Eigen::Matrix3d::Identity();
    int col = 0;
    A.colwise().norm().maxCoeff(&col);
    Eigen::Vector3d axis = A.col(col).normalized();
    // Pick the sign consistent with the (possibly tiny) vee part.
    if (axis.dot(vee) < 0.0) axis = -axis;
    return theta * axis;
  }
  return (theta / (2.0 * std::sin(theta))) * vee;
}

Eigen::Matrix3d projectToSO3(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Eigen::Matrix3d U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  return R;
}

double rotationAngle(const Eigen::Matrix3d& R) {
  return std::acos(std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0));
}

namespace {

// W(sigma, omega) such that exp of the sim(3) generator has translation W * upsilon.
// Closed form of the integral of exp(u*sigma) * exp(u*skew(omega)) over u in [0,1].
Eigen::Matrix3d sim3W(double sigma, const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d W = skew(omega);
  const double s = std::exp(sigma);

  double C;
  if (std::abs(sigma) < 1e-9) {
    C = 1.0 + 0.5 * sigma + sigma * sigma / 6.0;
  } else {
    C = (s - 1.0) / sigma;
  }

  double A, B;
  if (theta < 1e-9) {
    if (std::abs(sigma) < 1e-9) {
      A = 0.5;
      B = 1.0 / 6.0;
    } else {
      A = (s * (sigma - 1.0) + 1.0) / (sigma * sigma);
      B = (s * (sigma * sigma - 2.0 * sigma + 2.0) - 2.0) / (2.0 * sigma * sigma * sigma);
    }
  } else {
    const double denom = sigma * sigma + theta * theta;
    const double sin_t = std::sin(theta);
    const double cos_t = std::cos(theta);
    const double Is = (s * (sigma * sin_t - theta * cos_t) + theta) / denom;
    const double Ic = (s * (sigma * cos_t + theta * sin_t) - sigma) / denom;
    A = Is / theta;
    B = (C - Ic) / (theta * theta);
  }
  return C * Eigen::Matrix3d::Identity() + A * W + B * W * W;
}

}  // namespace

SimTransform expSim3(const Sim3Tangent& v) {
  const Eigen::Vector3d upsilon = v.head<3>();
  const Eigen::Vector3d omega = v.segment<3>(3);
  const double sigma = v(6);
  SimTransform S;
  S.s = std::exp(sigma);
  S.R = expSO3(omega);
  S.t = sim3W(sigma, omega) * upsilon;
  return S;
}

Sim3Tangent logSim3(const SimTransform& S) {
  Sim3Tangent v;
  const double sigma = std::log(S.s);
  const Eigen::Vector3d omega = logSO3(S.R);
  v.segment<3>(3) = omega;
  v(6) = sigma;
  v.head<3>() = sim3W(sigma, omega).lu().solve(S.t);
  return v;
}

}  // namespace fslam
