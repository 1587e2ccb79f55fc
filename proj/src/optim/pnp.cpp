#include "fslam/optim/pnp.hpp"

#include <Eigen/Dense>
#include <random>

namespace fslam {

namespace {

/// DLT estimation of the pose from >= 6 correspondences in normalized camera
/// coordinates. Returns false on degenerate input.
bool solveDlt(const std::vector<Eigen::Vector3d>& X, const std::vector<Eigen::Vector2d>& x,
              Pose& pose) {
  const std::size_t n = X.size();
  if (n < 6) return false;

  // Hartley-style conditioning of the 3-D points.
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : X) centroid += p;
  centroid /= static_cast<double>(n);
  double spread = 0.0;
  for (const auto& p : X) spread += (p - centroid).norm();
  spread /= static_cast<double>(n);
  if (spread < 1e-12) return false;
  const double s3 = std::sqrt(3.0) / spread;

  Eigen::MatrixXd A(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d Xn = s3 * (X[i] - centroid);
    const double u = x[i].x(), v = x[i].y();
    A.row(static_cast<Eigen::Index>(2 * i)) << Xn.x(), Xn.y(), Xn.z(), 1, 0, 0, 0, 0, -u * Xn.x(),
        -u * Xn.y(), -u * Xn.z(), -u;
    A.row(static_cast<Eigen::Index>(2 * i + 1)) << 0, 0, 0, 0, Xn.x(), Xn.y(), Xn.z(), 1,
        -v * Xn.x(), -v * Xn.y(), -v * Xn.z(), -v;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> P;
  P << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10), p(11);

  // Undo the conditioning: P_cond maps s3*(X - centroid).
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) *= s3;
  T.block<3, 1>(0, 3) = -s3 * centroid;
  P = P * T;

  Eigen::Matrix3d M = P.block<3, 3>(0, 0);
  Eigen::Vector3d p4 = P.col(3);
  if (M.determinant() < 0) {
    M = -M;
    p4 = -p4;
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> msvd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = msvd.singularValues().mean();
  if (scale < 1e-12) return false;
  pose.R = msvd.matrixU() * msvd.matrixV().transpose();
  if (pose.R.determinant() < 0) return false;  // cannot happen after the sign fix, kept as guard
  pose.t = p4 / scale;
  return pose.t.allFinite();
}

}  // namespace

PnpResult solvePnpRansac(std::span<const Eigen::Vector3d> points,
                         std::span<const Eigen::Vector2d> pixels, std::span<const double> sigmas,
                         const CameraIntrinsics& K, const PnpOptions& options) {
  PnpResult result;
  const std::size_t n = points.size();
  result.inliers.assign(n, 0);
  if (n < 6) return result;

  std::vector<Eigen::Vector2d> norm(n);
  for (std::size_t i = 0; i < n; ++i) norm[i] = K.normalize(pixels[i]);

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  auto countInliers = [&](const Pose& pose, std::vector<char>& mask) {
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d pc = pose.R * points[i] + pose.t;
      bool good = pc.z() > 1e-9;
      if (good) {
        const double u = K.fx * pc.x() / pc.z() + K.cx;
        const double v = K.fy * pc.y() / pc.z() + K.cy;
        const double e2 = (Eigen::Vector2d(u, v) - pixels[i]).squaredNorm();
        good = e2 <= options.chi2_threshold * sigmas[i] * sigmas[i];
      }
      mask[i] = good ? 1 : 0;
      count += good ? 1 : 0;
    }
    return count;
  };

  std::vector<char> mask(n, 0);
  std::vector<Eigen::Vector3d> sampleX(6);
  std::vector<Eigen::Vector2d> samplex(6);
  for (int it = 0; it < options.iterations; ++it) {
    for (std::size_t i = 0; i < 6; ++i) {
      const std::size_t j = i + rng() % (n - i);
      std::swap(order[i], order[j]);
      sampleX[i] = points[order[i]];
      samplex[i] = norm[order[i]];
    }
    Pose candidate;
    if (!solveDlt(sampleX, samplex, candidate)) continue;
    const int count = countInliers(candidate, mask);
    if (count > result.inlier_count) {
      result.inlier_count = count;
      result.pose = candidate;
      result.inliers = mask;
    }
  }
  if (result.inlier_count < options.min_inliers) return result;

  // Refit on the consensus set; keep the refit only if it does not lose it.
  std::vector<Eigen::Vector3d> fitX;
  std::vector<Eigen::Vector2d> fitx;
  for (std::size_t i = 0; i < n; ++i)
    if (result.inliers[i]) {
      fitX.push_back(points[i]);
      fitx.push_back(norm[i]);
    }
  Pose refined;
  if (solveDlt(fitX, fitx, refined)) {
    const int count = countInliers(refined, mask);
    if (count >= result.inlier_count) {
      result.inlier_count = count;
      result.pose = refined;
      result.inliers = mask;
    }
  }
  result.ok = result.inlier_count >= options.min_inliers;
  return result;
}

}  // namespace fslam
