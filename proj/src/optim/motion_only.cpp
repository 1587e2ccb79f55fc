#include "fslam/optim/motion_only.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "fslam/optim/reprojection.hpp"

namespace fslam {

namespace {

double robustCost(const Pose& pose, std::span<const Eigen::Vector3d> points,
                  std::span<const Eigen::Vector2d> obs, std::span<const double> sigmas,
                  const CameraIntrinsics& K, const std::vector<char>& active, double delta) {
  double total = 0.0;
  Eigen::Vector2d r;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!active[i]) continue;
    if (!reprojectionResidual(pose, points[i], K, obs[i], sigmas[i], r))
      return std::numeric_limits<double>::infinity();  // active point went behind: reject step
    total += huber(r.squaredNorm(), delta).cost;
  }
  return total;
}

}  // namespace

MotionOnlyResult optimizePose(const Pose& initial, std::span<const Eigen::Vector3d> points,
                              std::span<const Eigen::Vector2d> observations,
                              std::span<const double> sigmas, const CameraIntrinsics& K,
                              const MotionOnlyOptions& options) {
  const std::size_t n = points.size();
  MotionOnlyResult result;
  result.pose = initial;
  result.inliers.assign(n, 1);

  // Observations starting behind the camera can never seed the optimization.
  {
    Eigen::Vector2d r;
    for (std::size_t i = 0; i < n; ++i)
      if (!reprojectionResidual(initial, points[i], K, observations[i], sigmas[i], r))
        result.inliers[i] = 0;
  }

  for (int round = 0; round < options.rounds; ++round) {
    double lambda = 1e-3;
    double cost = robustCost(result.pose, points, observations, sigmas, K, result.inliers,
                             options.huber_delta);
    std::vector<double> costs{cost};

    for (int iter = 0; iter < options.iterations; ++iter) {
      Eigen::Matrix<double, 6, 6> H = Eigen::Matrix<double, 6, 6>::Zero();
      Eigen::Matrix<double, 6, 1> b = Eigen::Matrix<double, 6, 1>::Zero();
      Eigen::Vector2d r;
      Eigen::Matrix<double, 2, 6> Jp;
      Eigen::Matrix<double, 2, 3> Jx;
      std::size_t active_count = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!result.inliers[i]) continue;
        if (!reprojectionResidual(result.pose, points[i], K, observations[i], sigmas[i], r))
          continue;
        if (!reprojectionJacobians(result.pose, points[i], K, sigmas[i], Jp, Jx)) continue;
        const double w = huber(r.squaredNorm(), options.huber_delta).weight;
        H.noalias() += w * Jp.transpose() * Jp;
        b.noalias() -= w * Jp.transpose() * r;
        ++active_count;
      }
      if (active_count == 0 || b.lpNorm<Eigen::Infinity>() < 1e-14) break;

      Eigen::Matrix<double, 6, 6> damped = H;
      for (int d = 0; d < 6; ++d) damped(d, d) += lambda * std::max(H(d, d), 1e-12);
      const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(b);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }

      const Pose candidate = applyPoseIncrement(result.pose, delta);
      const double new_cost = robustCost(candidate, points, observations, sigmas, K,
                                         result.inliers, options.huber_delta);
      if (new_cost <= cost) {
        result.pose = candidate;
        const double improvement = cost - new_cost;
        cost = new_cost;
        costs.push_back(cost);
        lambda = std::max(lambda * 0.5, 1e-12);
        if (delta.norm() < 1e-12 || improvement < 1e-15 * (1.0 + cost)) break;
      } else {
        lambda *= 10.0;
      }
    }
    result.round_costs.push_back(std::move(costs));

    // Re-classify every observation against the chi2 gate at the new pose.
    Eigen::Vector2d r;
    for (std::size_t i = 0; i < n; ++i) {
      const bool ok = reprojectionResidual(result.pose, points[i], K, observations[i], sigmas[i], r);
      result.inliers[i] = ok && r.squaredNorm() <= options.chi2_threshold ? 1 : 0;
    }
  }

  result.inlier_count = 0;
  for (char flag : result.inliers) result.inlier_count += flag ? 1 : 0;
  result.lost = result.inlier_count < options.min_inliers;
  result.final_cost = robustCost(result.pose, points, observations, sigmas, K, result.inliers,
                                 options.huber_delta);
  if (!std::isfinite(result.final_cost)) result.final_cost = 0.0;
  return result;
}

}  // namespace fslam
