#include "fslam/core/alignment.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace fslam {

AlignmentResult umeyamaAlignPoints(const std::vector<Eigen::Vector3d>& from,
                                   const std::vector<Eigen::Vector3d>& to, bool with_scale) {
  AlignmentResult out;
  const int n = static_cast<int>(from.size());
  if (n < 3 || from.size() != to.size()) {
    out.status = AlignmentStatus::TooFewAssociations;
    return out;
  }
  out.association_count = n;

  Eigen::Vector3d mu_p = Eigen::Vector3d::Zero(), mu_q = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    mu_p += from[i];
    mu_q += to[i];
  }
  mu_p /= n;
  mu_q /= n;

  Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
  double var_p = 0.0;
  Eigen::Matrix<double, 3, Eigen::Dynamic> centered(3, n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d x = from[i] - mu_p;
    const Eigen::Vector3d y = to[i] - mu_q;
    sigma += y * x.transpose();
    var_p += x.squaredNorm();
    centered.col(i) = x;
  }
  sigma /= n;
  var_p /= n;

  // Rotation about the axis of a collinear point set is unobservable.
  Eigen::JacobiSVD<Eigen::MatrixXd> shape(centered);
  const Eigen::VectorXd sv = shape.singularValues();
  if (sv(0) < 1e-12 || sv(1) < 1e-9 * sv(0)) {
    out.status = AlignmentStatus::CollinearDegenerate;
    return out;
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d d = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) d(2) = -1.0;

  out.transform.R = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  out.transform.s = with_scale ? svd.singularValues().dot(d) / var_p : 1.0;
  out.transform.t = mu_q - out.transform.s * (out.transform.R * mu_p);
  out.status = AlignmentStatus::Ok;
  return out;
}

AlignmentResult umeyamaAlign(const Trajectory& estimate, const Trajectory& reference,
                             const AlignmentOptions& opts) {
  const auto pairs = associateByTimestamp(estimate, reference, opts.association_tolerance_s);
  if (static_cast<int>(pairs.size()) < opts.min_associations) {
    AlignmentResult out;
    out.status = AlignmentStatus::TooFewAssociations;
    out.association_count = static_cast<int>(pairs.size());
    return out;
  }
  std::vector<Eigen::Vector3d> from, to;
  from.reserve(pairs.size());
  to.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    from.push_back(estimate.position(i));
    to.push_back(reference.position(j));
  }
  return umeyamaAlignPoints(from, to, opts.with_scale);
}

}  // namespace fslam
