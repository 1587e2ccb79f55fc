#pragma once

#include <vector>

#include "fslam/core/alignment.hpp"
#include "fslam/core/trajectory.hpp"

namespace fslam {

enum class MetricStatus { Ok, TooFewAssociations, CollinearDegenerate, TrajectoryTooShort };

struct AteResult {
  MetricStatus status = MetricStatus::TooFewAssociations;
  double rmse = 0.0;        // translational RMSE after alignment
  SimTransform alignment;   // transform applied to the estimate
  int association_count = 0;

  bool ok() const { return status == MetricStatus::Ok; }
};

/// Absolute trajectory error: timestamp association, Umeyama alignment
/// (Sim(3) in monocular mode, SE(3) otherwise), RMSE of the translational
/// residuals.
AteResult computeAte(const Trajectory& estimate, const Trajectory& reference, bool monocular,
                     double tolerance_s = 0.01);

struct RpeResult {
  MetricStatus status = MetricStatus::TrajectoryTooShort;
  double trans_percent = 0.0;    // mean translational drift, percent of path length
  double rot_deg_per_unit = 0.0; // mean rotational drift, degrees per unit length
  int sample_count = 0;

  bool ok() const { return status == MetricStatus::Ok; }
};

std::vector<double> kittiLengths();  // {100..800 step 100}

/// KITTI-style relative pose error. For every start frame and every path
/// length l the end frame is the first whose ground-truth arc length reaches
/// l; the relative-pose error E = rel_ref^-1 * rel_est is normalized by the
/// achieved arc length (so a uniformly 1%-scaled estimate reads exactly 1%).
/// Lengths default to the KITTI set; desk-scale runs pass scaled-down sets.
RpeResult computeRpe(const Trajectory& estimate, const Trajectory& reference,
                     const std::vector<double>& lengths = kittiLengths(),
                     double tolerance_s = 0.01);

/// Fraction of reference frames with an associated estimate.
double trajectoryCoverage(const Trajectory& estimate, const Trajectory& reference,
                          double tolerance_s = 0.01);

struct MetricReport {
  int run_count = 0;
  double ate_rmse = 0.0;   // means over runs
  double rpe_trans = 0.0;  // percent
  double rpe_rot = 0.0;    // degrees per unit length
  double coverage = 0.0;

  std::vector<double> per_run_ate;
  std::vector<double> per_run_rpe_trans;
  std::vector<double> per_run_rpe_rot;
  std::vector<double> per_run_coverage;
};

/// Arithmetic means of each metric across reports; per-run values retained.
/// Throws std::invalid_argument on an empty list.
MetricReport aggregate(const std::vector<MetricReport>& reports);

}  // namespace fslam
