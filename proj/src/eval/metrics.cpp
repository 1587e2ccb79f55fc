#include "fslam/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fslam {

AteResult computeAte(const Trajectory& estimate, const Trajectory& reference, bool monocular,
                     double tolerance_s) {
  AlignmentOptions opts;
  opts.with_scale = monocular;
  opts.association_tolerance_s = tolerance_s;
  const AlignmentResult aligned = umeyamaAlign(estimate, reference, opts);

  AteResult out;
  out.association_count = aligned.association_count;
  if (!aligned.ok()) {
    out.status = aligned.status == AlignmentStatus::CollinearDegenerate
                     ? MetricStatus::CollinearDegenerate
                     : MetricStatus::TooFewAssociations;
    return out;
  }
  out.status = MetricStatus::Ok;
  out.alignment = aligned.transform;

  const auto pairs = associateByTimestamp(estimate, reference, tolerance_s);
  double sum_sq = 0.0;
  for (const auto& [ei, ri] : pairs)
    sum_sq += (aligned.transform * estimate.position(ei) - reference.position(ri)).squaredNorm();
  out.rmse = std::sqrt(sum_sq / static_cast<double>(pairs.size()));
  return out;
}

std::vector<double> kittiLengths() {
  return {100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0};
}

RpeResult computeRpe(const Trajectory& estimate, const Trajectory& reference,
                     const std::vector<double>& lengths, double tolerance_s) {
  RpeResult out;
  const auto pairs = associateByTimestamp(estimate, reference, tolerance_s);
  const std::size_t n = pairs.size();
  if (n < 2) return out;

  // Cumulative ground-truth arc length over the associated subsequence.
  std::vector<double> arc(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    arc[i] = arc[i - 1] +
             (reference.position(pairs[i].second) - reference.position(pairs[i - 1].second)).norm();

  std::vector<double> sorted_lengths = lengths;
  std::sort(sorted_lengths.begin(), sorted_lengths.end());

  double trans_sum = 0.0, rot_sum = 0.0;
  int samples = 0;
  for (std::size_t start = 0; start < n; ++start) {
    std::size_t end = start + 1;
    for (double len : sorted_lengths) {
      while (end < n && arc[end] - arc[start] < len) ++end;
      if (end >= n) break;  // lengths ascend: longer ones cannot be reached either
      const double achieved = arc[end] - arc[start];
      if (achieved <= 0.0) continue;

      const Pose& est_s = estimate.points[pairs[start].first].pose;
      const Pose& est_e = estimate.points[pairs[end].first].pose;
      const Pose& ref_s = reference.points[pairs[start].second].pose;
      const Pose& ref_e = reference.points[pairs[end].second].pose;
      // camera-to-world inputs: relative motion = T_s^-1 * T_e
      const Pose rel_est = compose(est_s.inverse(), est_e);
      const Pose rel_ref = compose(ref_s.inverse(), ref_e);
      const Pose error = compose(rel_ref.inverse(), rel_est);

      trans_sum += error.t.norm() / achieved;
      rot_sum += rotationAngle(error.R) / achieved;
      ++samples;
    }
  }
  if (samples == 0) return out;

  out.status = MetricStatus::Ok;
  out.sample_count = samples;
  out.trans_percent = 100.0 * trans_sum / samples;
  out.rot_deg_per_unit = (180.0 / std::numbers::pi) * rot_sum / samples;
  return out;
}

double trajectoryCoverage(const Trajectory& estimate, const Trajectory& reference,
                          double tolerance_s) {
  if (reference.empty()) return 0.0;
  const auto pairs = associateByTimestamp(estimate, reference, tolerance_s);
  return static_cast<double>(pairs.size()) / static_cast<double>(reference.size());
}

MetricReport aggregate(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  MetricReport out;
  for (const MetricReport& r : reports) {
    out.run_count += r.run_count;
    out.per_run_ate.insert(out.per_run_ate.end(), r.per_run_ate.begin(), r.per_run_ate.end());
    out.per_run_rpe_trans.insert(out.per_run_rpe_trans.end(), r.per_run_rpe_trans.begin(),
                                 r.per_run_rpe_trans.end());
    out.per_run_rpe_rot.insert(out.per_run_rpe_rot.end(), r.per_run_rpe_rot.begin(),
                               r.per_run_rpe_rot.end());
    out.per_run_coverage.insert(out.per_run_coverage.end(), r.per_run_coverage.begin(),
                                r.per_run_coverage.end());
  }
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  out.ate_rmse = mean(out.per_run_ate);
  out.rpe_trans = mean(out.per_run_rpe_trans);
  out.rpe_rot = mean(out.per_run_rpe_rot);
  out.coverage = mean(out.per_run_coverage);
  return out;
}

}  // namespace fslam
