#include "fslam/optim/local_ba.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "fslam/optim/reprojection.hpp"

namespace fslam {

namespace {

const Pose& cameraOf(const LocalBaProblem& p, const BaObservation& o) {
  return o.fixed_camera ? p.fixed_poses[static_cast<std::size_t>(o.camera)]
                        : p.poses[static_cast<std::size_t>(o.camera)];
}

double robustCost(const LocalBaProblem& p, const std::vector<Pose>& poses,
                  const std::vector<Eigen::Vector3d>& points, const std::vector<char>& active,
                  double delta) {
  double total = 0.0;
  Eigen::Vector2d r;
  for (std::size_t i = 0; i < p.observations.size(); ++i) {
    if (!active[i]) continue;
    const BaObservation& o = p.observations[i];
    const Pose& cam = o.fixed_camera ? p.fixed_poses[static_cast<std::size_t>(o.camera)]
                                     : poses[static_cast<std::size_t>(o.camera)];
    if (!reprojectionResidual(cam, points[static_cast<std::size_t>(o.point)], p.K, o.uv, o.sigma, r))
      return std::numeric_limits<double>::infinity();
    total += huber(r.squaredNorm(), delta).cost;
  }
  return total;
}

/// One LM stage over a fixed active set; appends [start, accepted...] costs.
void runStage(LocalBaProblem& p, std::vector<char>& active, int iterations,
              const LocalBaOptions& opt, std::vector<std::vector<double>>& stage_costs) {
  const std::size_t P = p.poses.size();
  const std::size_t Q = p.points.size();
  const std::size_t n = p.observations.size();

  double lambda = 1e-3;
  double cost = robustCost(p, p.poses, p.points, active, opt.huber_delta);
  std::vector<double> costs{cost};

  for (int iter = 0; iter < iterations; ++iter) {
    // Accumulators: block-diagonal camera and point Hessians, camera-point
    // coupling blocks per point, gradient halves.
    std::vector<Eigen::Matrix<double, 6, 6>> Hcc(P, Eigen::Matrix<double, 6, 6>::Zero());
    std::vector<Eigen::Matrix<double, 6, 1>> bc(P, Eigen::Matrix<double, 6, 1>::Zero());
    std::vector<Eigen::Matrix3d> Vp(Q, Eigen::Matrix3d::Zero());
    std::vector<Eigen::Vector3d> bp(Q, Eigen::Vector3d::Zero());
    std::vector<std::vector<std::pair<int, Eigen::Matrix<double, 6, 3>>>> E(Q);

    Eigen::Vector2d r;
    Eigen::Matrix<double, 2, 6> Jc;
    Eigen::Matrix<double, 2, 3> Jx;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const BaObservation& o = p.observations[i];
      const Pose& cam = cameraOf(p, o);
      const auto pt = static_cast<std::size_t>(o.point);
      if (!reprojectionResidual(cam, p.points[pt], p.K, o.uv, o.sigma, r)) continue;
      if (!reprojectionJacobians(cam, p.points[pt], p.K, o.sigma, Jc, Jx)) continue;
      const double w = huber(r.squaredNorm(), opt.huber_delta).weight;
      Vp[pt].noalias() += w * Jx.transpose() * Jx;
      bp[pt].noalias() -= w * Jx.transpose() * r;
      if (!o.fixed_camera) {
        const auto cam_idx = static_cast<std::size_t>(o.camera);
        Hcc[cam_idx].noalias() += w * Jc.transpose() * Jc;
        bc[cam_idx].noalias() -= w * Jc.transpose() * r;
        E[pt].emplace_back(o.camera, (w * Jc.transpose() * Jx).eval());
      }
      ++used;
    }
    if (used == 0) break;

    double grad_max = 0.0;
    for (const auto& g : bc) grad_max = std::max(grad_max, g.lpNorm<Eigen::Infinity>());
    for (const auto& g : bp) grad_max = std::max(grad_max, g.lpNorm<Eigen::Infinity>());
    if (grad_max < 1e-14) break;

    // Damped point blocks and their inverses.
    std::vector<Eigen::Matrix3d> Vinv(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      Eigen::Matrix3d V = Vp[q];
      for (int d = 0; d < 3; ++d) V(d, d) += lambda * std::max(Vp[q](d, d), 1e-12);
      Vinv[q] = V.inverse();
    }

    // Schur complement on points: S = Hcc - E Vinv E^T, rhs = bc - E Vinv bp.
    Eigen::VectorXd delta_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(6 * P));
    bool solved = true;
    if (P > 0) {
      Eigen::MatrixXd S = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(6 * P),
                                                static_cast<Eigen::Index>(6 * P));
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(6 * P));
      for (std::size_t c = 0; c < P; ++c) {
        Eigen::Matrix<double, 6, 6> D = Hcc[c];
        for (int d = 0; d < 6; ++d) D(d, d) += lambda * std::max(Hcc[c](d, d), 1e-12);
        S.block<6, 6>(static_cast<Eigen::Index>(6 * c), static_cast<Eigen::Index>(6 * c)) = D;
        rhs.segment<6>(static_cast<Eigen::Index>(6 * c)) = bc[c];
      }
      for (std::size_t q = 0; q < Q; ++q) {
        for (const auto& [c1, E1] : E[q]) {
          const Eigen::Matrix<double, 6, 3> EV = E1 * Vinv[q];
          rhs.segment<6>(static_cast<Eigen::Index>(6 * c1)).noalias() -= EV * bp[q];
          for (const auto& [c2, E2] : E[q])
            S.block<6, 6>(static_cast<Eigen::Index>(6 * c1), static_cast<Eigen::Index>(6 * c2))
                .noalias() -= EV * E2.transpose();
        }
      }
      delta_c = S.ldlt().solve(rhs);
      solved = delta_c.allFinite();
    }
    if (!solved) {
      lambda *= 10.0;
      continue;
    }

    // Back-substitute the point increments.
    std::vector<Eigen::Vector3d> delta_p(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      Eigen::Vector3d acc = bp[q];
      for (const auto& [c, Ecp] : E[q])
        acc.noalias() -= Ecp.transpose() * delta_c.segment<6>(static_cast<Eigen::Index>(6 * c));
      delta_p[q] = Vinv[q] * acc;
    }

    std::vector<Pose> new_poses = p.poses;
    for (std::size_t c = 0; c < P; ++c)
      new_poses[c] =
          applyPoseIncrement(p.poses[c], delta_c.segment<6>(static_cast<Eigen::Index>(6 * c)));
    std::vector<Eigen::Vector3d> new_points = p.points;
    for (std::size_t q = 0; q < Q; ++q) new_points[q] += delta_p[q];

    const double new_cost = robustCost(p, new_poses, new_points, active, opt.huber_delta);
    if (new_cost <= cost) {
      const double improvement = cost - new_cost;
      p.poses = std::move(new_poses);
      p.points = std::move(new_points);
      cost = new_cost;
      costs.push_back(cost);
      lambda = std::max(lambda * 0.5, 1e-12);
      double step = delta_c.size() > 0 ? delta_c.lpNorm<Eigen::Infinity>() : 0.0;
      for (const auto& dp : delta_p) step = std::max(step, dp.lpNorm<Eigen::Infinity>());
      if (step < 1e-13 || improvement < 1e-15 * (1.0 + cost)) break;
    } else {
      lambda *= 10.0;
    }
  }
  stage_costs.push_back(std::move(costs));
}

}  // namespace

LocalBaResult solveLocalBa(LocalBaProblem& problem, const LocalBaOptions& options) {
  const std::size_t n = problem.observations.size();
  LocalBaResult result;
  result.active.assign(n, 1);

  Eigen::Vector2d r;
  for (std::size_t i = 0; i < n; ++i) {
    const BaObservation& o = problem.observations[i];
    if (!reprojectionResidual(cameraOf(problem, o), problem.points[static_cast<std::size_t>(o.point)],
                              problem.K, o.uv, o.sigma, r))
      result.active[i] = 0;
  }
  result.initial_cost =
      robustCost(problem, problem.poses, problem.points, result.active, options.huber_delta);

  runStage(problem, result.active, options.stage1_iterations, options, result.stage_costs);

  // Outlier removal between stages.
  for (std::size_t i = 0; i < n; ++i) {
    if (!result.active[i]) continue;
    const BaObservation& o = problem.observations[i];
    const bool ok =
        reprojectionResidual(cameraOf(problem, o), problem.points[static_cast<std::size_t>(o.point)],
                             problem.K, o.uv, o.sigma, r);
    if (!ok || r.squaredNorm() > options.chi2_threshold) {
      result.active[i] = 0;
      ++result.removed;
    }
  }

  runStage(problem, result.active, options.stage2_iterations, options, result.stage_costs);
  result.final_cost =
      robustCost(problem, problem.poses, problem.points, result.active, options.huber_delta);
  if (!std::isfinite(result.final_cost)) result.final_cost = 0.0;
  return result;
}

}  // namespace fslam
