#include "fslam/eval/report.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace fslam {

namespace {

void atomicWrite(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string formatReport(const MetricReport& report) {
  std::ostringstream out;
  out.precision(9);
  out << "runs: " << report.run_count << '\n';
  out << "ate_rmse: " << report.ate_rmse << '\n';
  out << "rpe_trans_percent: " << report.rpe_trans << '\n';
  out << "rpe_rot_deg_per_unit: " << report.rpe_rot << '\n';
  out << "coverage: " << report.coverage << '\n';
  for (std::size_t i = 0; i < report.per_run_ate.size(); ++i) {
    out << "run_" << i + 1 << "_ate_rmse: " << report.per_run_ate[i] << '\n';
    if (i < report.per_run_rpe_trans.size())
      out << "run_" << i + 1 << "_rpe_trans_percent: " << report.per_run_rpe_trans[i] << '\n';
    if (i < report.per_run_rpe_rot.size())
      out << "run_" << i + 1 << "_rpe_rot_deg_per_unit: " << report.per_run_rpe_rot[i] << '\n';
    if (i < report.per_run_coverage.size())
      out << "run_" << i + 1 << "_coverage: " << report.per_run_coverage[i] << '\n';
  }
  return out.str();
}

void writeReport(const MetricReport& report, const std::filesystem::path& path) {
  atomicWrite(path, formatReport(report));
}

void writeTrajectoryPlotSvg(const Trajectory& estimate, const Trajectory& reference,
                            const SimTransform& alignment, const std::filesystem::path& path) {
  // Pick the two axes along which the reference spreads the most.
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < reference.size(); ++i) mean += reference.position(i);
  if (!reference.empty()) mean /= static_cast<double>(reference.size());
  Eigen::Vector3d var = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < reference.size(); ++i)
    var += (reference.position(i) - mean).cwiseAbs2();
  std::array<int, 3> axes = {0, 1, 2};
  std::sort(axes.begin(), axes.end(), [&](int a, int b) { return var[a] > var[b]; });
  const int ax = std::min(axes[0], axes[1]);
  const int ay = std::max(axes[0], axes[1]);

  struct Series {
    const char* color;
    const char* label;
    std::vector<Eigen::Vector2d> pts;
  };
  auto flatten = [&](const Trajectory& t, const SimTransform* S) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Eigen::Vector3d p = S ? (*S * t.position(i)) : t.position(i);
      pts.emplace_back(p[ax], p[ay]);
    }
    return pts;
  };
  std::array<Series, 3> series = {Series{"#888888", "reference", flatten(reference, nullptr)},
                                  Series{"#cc3333", "estimate", flatten(estimate, nullptr)},
                                  Series{"#3366cc", "aligned", flatten(estimate, &alignment)}};

  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const Series& s : series)
    for (const Eigen::Vector2d& p : s.pts) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  if (lo.x() > hi.x()) {
    lo.setZero();
    hi.setOnes();
  }
  const Eigen::Vector2d span = (hi - lo).cwiseMax(1e-9);
  const double size = 640.0, margin = 40.0;
  const double scale = (size - 2 * margin) / std::max(span.x(), span.y());
  auto toPx = [&](const Eigen::Vector2d& p) {
    // y grows downward in SVG
    return Eigen::Vector2d(margin + (p.x() - lo.x()) * scale,
                           size - margin - (p.y() - lo.y()) * scale);
  };

  std::ostringstream svg;
  svg.precision(6);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double label_y = margin;
  for (const Series& s : series) {
    if (s.pts.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (const Eigen::Vector2d& p : s.pts) {
      const Eigen::Vector2d q = toPx(p);
      svg << q.x() << ',' << q.y() << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << margin << "\" y=\"" << label_y << "\" fill=\"" << s.color
        << "\" font-size=\"14\">" << s.label << "</text>\n";
    label_y += 18.0;
  }
  svg << "</svg>\n";
  atomicWrite(path, svg.str());
}

}  // namespace fslam
