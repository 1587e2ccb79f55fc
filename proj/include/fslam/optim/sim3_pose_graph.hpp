#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "fslam/core/pose.hpp"

namespace fslam {

struct Sim3Edge {
  std::uint64_t from = 0;
  std::uint64_t to = 0;
  SimTransform measurement;  // S_{to<-from} captured at edge construction
  double weight = 1.0;
};

/// Nodes are world->keyframe similarities S_iw; the edge residual is
/// log(S_meas * S_from * S_to^-1), zero exactly when the estimated relative
/// transform matches the measurement.
struct Sim3PoseGraphProblem {
  std::map<std::uint64_t, SimTransform> nodes;
  std::vector<Sim3Edge> edges;
  std::set<std::uint64_t> fixed;
};

struct Sim3PoseGraphOptions {
  int iterations = 30;
  double fd_step = 1e-6;  // central-difference step for the edge Jacobians
};

struct Sim3PoseGraphResult {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> accepted_costs;  // non-increasing, starts at initial
};

double sim3EdgeResidualNorm2(const Sim3PoseGraphProblem& problem, const Sim3Edge& edge);

/// Levenberg-Marquardt over the non-fixed nodes with numerically
/// differentiated edge residuals (right-multiplicative 7-vector increments).
Sim3PoseGraphResult solveSim3PoseGraph(Sim3PoseGraphProblem& problem,
                                       const Sim3PoseGraphOptions& options = {});

}  // namespace fslam
