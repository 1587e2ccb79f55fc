#include "fslam/core/two_view.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "fslam/core/triangulation.hpp"

namespace fslam {

namespace {

Eigen::Matrix3d solveEight(const std::vector<Eigen::Vector2d>& x1,
                           const std::vector<Eigen::Vector2d>& x2,
                           const std::vector<int>& idx) {
  Eigen::MatrixXd A(static_cast<int>(idx.size()), 9);
  for (int r = 0; r < static_cast<int>(idx.size()); ++r) {
    const Eigen::Vector2d& a = x1[idx[r]];
    const Eigen::Vector2d& b = x2[idx[r]];
    A.row(r) << b.x() * a.x(), b.x() * a.y(), b.x(), b.y() * a.x(), b.y() * a.y(), b.y(), a.x(),
        a.y(), 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Eigen::Matrix3d E;
  E << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);

  // Project onto the essential manifold: two equal singular values, one zero.
  Eigen::JacobiSVD<Eigen::Matrix3d> esvd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = esvd.singularValues();
  const double m = 0.5 * (d(0) + d(1));
  return esvd.matrixU() * Eigen::Vector3d(m, m, 0.0).asDiagonal() * esvd.matrixV().transpose();
}

struct Candidate {
  Pose pose;
  int good = 0;
};

// Count matches that triangulate in front of both cameras with usable parallax.
int checkCheirality(const Pose& T21, const std::vector<Eigen::Vector2d>& x1,
                    const std::vector<Eigen::Vector2d>& x2, const std::vector<char>& mask) {
  CameraIntrinsics unit;
  unit.fx = unit.fy = 1.0;
  unit.cx = unit.cy = 0.0;
  unit.width = unit.height = 1;  // bounds unused below

  TriangulationOptions opts;
  opts.min_parallax_deg = 0.3;
  opts.require_positive_depth = true;
  const Pose T1 = Pose::Identity();

  int good = 0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    if (!mask[i]) continue;
    // Triangulate in normalized coordinates (unit intrinsics, bounds ignored).
    Eigen::Matrix<double, 3, 4> P1, P2;
    P1.leftCols<3>() = T1.R;
    P1.col(3) = T1.t;
    P2.leftCols<3>() = T21.R;
    P2.col(3) = T21.t;
    Eigen::Matrix4d A;
    A.row(0) = x1[i].x() * P1.row(2) - P1.row(0);
    A.row(1) = x1[i].y() * P1.row(2) - P1.row(1);
    A.row(2) = x2[i].x() * P2.row(2) - P2.row(0);
    A.row(3) = x2[i].y() * P2.row(2) - P2.row(1);
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
    Eigen::Vector4d Xh = svd.matrixV().col(3);
    if (std::abs(Xh(3)) < 1e-15) continue;
    const Eigen::Vector3d X = Xh.head<3>() / Xh(3);
    if (X.z() <= 0.0 || (T21 * X).z() <= 0.0) continue;
    if (parallaxDeg(X, T1, T21) < opts.min_parallax_deg) continue;
    ++good;
  }
  return good;
}

}  // namespace

double sampsonDistance(const Eigen::Matrix3d& E, const Eigen::Vector2d& x1,
                       const Eigen::Vector2d& x2) {
  const Eigen::Vector3d a(x1.x(), x1.y(), 1.0);
  const Eigen::Vector3d b(x2.x(), x2.y(), 1.0);
  const Eigen::Vector3d Ea = E * a;
  const Eigen::Vector3d Etb = E.transpose() * b;
  const double num = b.dot(Ea);
  const double denom = Ea.head<2>().squaredNorm() + Etb.head<2>().squaredNorm();
  if (denom < 1e-20) return std::numeric_limits<double>::infinity();
  return std::abs(num) / std::sqrt(denom);
}

TwoViewResult estimateTwoView(const std::vector<PixelMatch>& matches, const CameraIntrinsics& K,
                              const RansacConfig& cfg) {
  TwoViewResult out;
  const int n = static_cast<int>(matches.size());
  if (n < 8) {
    out.status = TwoViewStatus::InsufficientMatches;
    return out;
  }

  std::vector<Eigen::Vector2d> x1(n), x2(n);
  for (int i = 0; i < n; ++i) {
    x1[i] = K.normalize(matches[i].p1);
    x2[i] = K.normalize(matches[i].p2);
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  Eigen::Matrix3d best_E = Eigen::Matrix3d::Zero();
  std::vector<char> best_mask(n, 0);
  int best_count = 0;

  std::vector<int> sample(8);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    for (int k = 0; k < 8; ++k) {
      std::uniform_int_distribution<int> dist(k, n - 1);
      std::swap(order[k], order[dist(rng)]);
      sample[k] = order[k];
    }
    const Eigen::Matrix3d E = solveEight(x1, x2, sample);
    std::vector<char> mask(n, 0);
    int count = 0;
    for (int i = 0; i < n; ++i) {
      if (sampsonDistance(E, x1[i], x2[i]) < cfg.inlier_threshold) {
        mask[i] = 1;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_mask = mask;
      best_E = E;
    }
  }

  if (best_count < 8 || best_count < cfg.min_inlier_ratio * n) {
    out.status = TwoViewStatus::NoConsensus;
    return out;
  }

  // Refit on the consensus set and refresh the inlier mask once.
  std::vector<int> inlier_idx;
  inlier_idx.reserve(best_count);
  for (int i = 0; i < n; ++i)
    if (best_mask[i]) inlier_idx.push_back(i);
  Eigen::Matrix3d E = solveEight(x1, x2, inlier_idx);
  std::vector<char> mask(n, 0);
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (sampsonDistance(E, x1[i], x2[i]) < cfg.inlier_threshold) {
      mask[i] = 1;
      ++count;
    }
  }
  if (count < 8 || count < cfg.min_inlier_ratio * n) {
    out.status = TwoViewStatus::NoConsensus;
    return out;
  }

  // Four-way decomposition; pick the pose by cheirality consensus.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU();
  Eigen::Matrix3d V = svd.matrixV();
  if (U.determinant() < 0.0) U *= -1.0;
  if (V.determinant() < 0.0) V *= -1.0;
  Eigen::Matrix3d W = Eigen::Matrix3d::Zero();
  W(0, 1) = -1.0;
  W(1, 0) = 1.0;
  W(2, 2) = 1.0;
  const Eigen::Matrix3d R1 = U * W * V.transpose();
  const Eigen::Matrix3d R2 = U * W.transpose() * V.transpose();
  const Eigen::Vector3d t = U.col(2).normalized();

  std::array<Candidate, 4> cands = {Candidate{Pose(R1, t)}, Candidate{Pose(R1, -t)},
                                    Candidate{Pose(R2, t)}, Candidate{Pose(R2, -t)}};
  int best_good = 0, second_good = 0, best_idx = -1;
  for (int c = 0; c < 4; ++c) {
    cands[c].good = checkCheirality(cands[c].pose, x1, x2, mask);
    if (cands[c].good > best_good) {
      second_good = best_good;
      best_good = cands[c].good;
      best_idx = c;
    } else if (cands[c].good > second_good) {
      second_good = cands[c].good;
    }
  }
  if (best_idx < 0 || best_good == 0 || second_good >= static_cast<int>(0.9 * best_good)) {
    out.status = TwoViewStatus::DegenerateConfiguration;
    return out;
  }

  out.status = TwoViewStatus::Ok;
  out.relative = cands[best_idx].pose;
  out.essential = E;
  out.inliers = mask;
  out.inlier_count = count;
  return out;
}

}  // namespace fslam
