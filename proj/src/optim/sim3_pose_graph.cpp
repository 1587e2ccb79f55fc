#include "fslam/optim/sim3_pose_graph.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace fslam {

namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;

Vec7 edgeResidual(const SimTransform& meas, const SimTransform& from, const SimTransform& to) {
  return logSim3(compose(compose(meas, from), to.inverse()));
}

SimTransform perturb(const SimTransform& S, const Vec7& delta) {
  return compose(S, expSim3(delta));
}

double totalCost(const Sim3PoseGraphProblem& p) {
  double c = 0.0;
  for (const auto& e : p.edges)
    c += e.weight * edgeResidual(e.measurement, p.nodes.at(e.from), p.nodes.at(e.to)).squaredNorm();
  return c;
}

}  // namespace

double sim3EdgeResidualNorm2(const Sim3PoseGraphProblem& problem, const Sim3Edge& edge) {
  return edgeResidual(edge.measurement, problem.nodes.at(edge.from), problem.nodes.at(edge.to))
      .squaredNorm();
}

Sim3PoseGraphResult solveSim3PoseGraph(Sim3PoseGraphProblem& problem,
                                       const Sim3PoseGraphOptions& options) {
  Sim3PoseGraphResult result;
  result.initial_cost = totalCost(problem);
  result.accepted_costs.push_back(result.initial_cost);

  // Variable index per non-fixed node.
  std::map<std::uint64_t, int> index;
  for (const auto& [id, _] : problem.nodes)
    if (problem.fixed.count(id) == 0) index[id] = static_cast<int>(index.size());
  const int N = static_cast<int>(index.size());
  if (N == 0 || problem.edges.empty()) {
    result.final_cost = result.initial_cost;
    return result;
  }

  double lambda = 1e-4;
  double cost = result.initial_cost;
  const double h = options.fd_step;

  for (int iter = 0; iter < options.iterations; ++iter) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(7 * N, 7 * N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(7 * N);

    for (const auto& e : problem.edges) {
      const SimTransform& Sf = problem.nodes.at(e.from);
      const SimTransform& St = problem.nodes.at(e.to);
      const Vec7 r = edgeResidual(e.measurement, Sf, St);

      const bool var_f = index.count(e.from) != 0;
      const bool var_t = index.count(e.to) != 0;
      Mat7 Jf = Mat7::Zero(), Jt = Mat7::Zero();
      for (int k = 0; k < 7; ++k) {
        Vec7 d = Vec7::Zero();
        d(k) = h;
        if (var_f)
          Jf.col(k) = (edgeResidual(e.measurement, perturb(Sf, d), St) -
                       edgeResidual(e.measurement, perturb(Sf, -d), St)) /
                      (2.0 * h);
        if (var_t)
          Jt.col(k) = (edgeResidual(e.measurement, Sf, perturb(St, d)) -
                       edgeResidual(e.measurement, Sf, perturb(St, -d))) /
                      (2.0 * h);
      }

      if (var_f) {
        const int i = 7 * index.at(e.from);
        H.block<7, 7>(i, i).noalias() += e.weight * Jf.transpose() * Jf;
        b.segment<7>(i).noalias() -= e.weight * Jf.transpose() * r;
      }
      if (var_t) {
        const int j = 7 * index.at(e.to);
        H.block<7, 7>(j, j).noalias() += e.weight * Jt.transpose() * Jt;
        b.segment<7>(j).noalias() -= e.weight * Jt.transpose() * r;
      }
      if (var_f && var_t) {
        const int i = 7 * index.at(e.from);
        const int j = 7 * index.at(e.to);
        H.block<7, 7>(i, j).noalias() += e.weight * Jf.transpose() * Jt;
        H.block<7, 7>(j, i).noalias() += e.weight * Jt.transpose() * Jf;
      }
    }
    if (b.lpNorm<Eigen::Infinity>() < 1e-14) break;

    Eigen::MatrixXd damped = H;
    for (int d = 0; d < 7 * N; ++d) damped(d, d) += lambda * std::max(H(d, d), 1e-12);
    const Eigen::VectorXd delta = damped.ldlt().solve(b);
    if (!delta.allFinite()) {
      lambda *= 10.0;
      continue;
    }

    std::map<std::uint64_t, SimTransform> candidate = problem.nodes;
    for (const auto& [id, i] : index) candidate[id] = perturb(problem.nodes.at(id), delta.segment<7>(7 * i));

    Sim3PoseGraphProblem trial{std::move(candidate), problem.edges, problem.fixed};
    const double new_cost = totalCost(trial);
    if (new_cost <= cost) {
      const double improvement = cost - new_cost;
      problem.nodes = std::move(trial.nodes);
      cost = new_cost;
      result.accepted_costs.push_back(cost);
      lambda = std::max(lambda * 0.5, 1e-12);
      if (delta.lpNorm<Eigen::Infinity>() < 1e-12 || improvement < 1e-15 * (1.0 + cost)) break;
    } else {
      lambda *= 10.0;
    }
  }

  result.final_cost = cost;
  return result;
}

}  // namespace fslam
