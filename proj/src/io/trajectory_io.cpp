#include "fslam/io/trajectory_io.hpp"

#include <Eigen/Geometry>
#include <cctype>
#include <fstream>
#include <sstream>
#include <vector>

#include "fslam/core/pose.hpp"

namespace fslam {

namespace {

std::vector<double> parseLine(const std::string& line, int line_no) {
  std::istringstream in(line);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) {
    in.clear();
    std::string rest;
    in >> rest;
    if (!rest.empty()) throw TrajectoryIoError("non-numeric token '" + rest + "'", line_no);
  }
  return values;
}

bool isBlank(const std::string& line) {
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) return c == '#';
  return true;
}

Pose poseFromKittiRow(const std::vector<double>& v) {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) R(r, c) = v[static_cast<std::size_t>(r * 4 + c)];
    t(r) = v[static_cast<std::size_t>(r * 4 + 3)];
  }
  return Pose(projectToSO3(R), t);
}

Pose poseFromTumRow(const std::vector<double>& v) {
  const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);  // w, x, y, z
  return Pose(q.normalized().toRotationMatrix(), {v[1], v[2], v[3]});
}

}  // namespace

Trajectory loadTrajectory(const std::filesystem::path& path, TrajectoryFormat format) {
  std::ifstream in(path);
  if (!in) throw TrajectoryIoError("cannot open " + path.string());

  Trajectory traj;
  std::string line;
  int line_no = 0;
  long index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (isBlank(line)) continue;
    const std::vector<double> v = parseLine(line, line_no);
    if (format == TrajectoryFormat::Kitti) {
      if (v.size() != 12)
        throw TrajectoryIoError("expected 12 values, got " + std::to_string(v.size()), line_no);
      traj.points.push_back({static_cast<double>(index), poseFromKittiRow(v), index});
    } else {
      if (v.size() != 8)
        throw TrajectoryIoError("expected 8 values, got " + std::to_string(v.size()), line_no);
      traj.points.push_back({v[0], poseFromTumRow(v), index});
    }
    ++index;
  }
  if (!traj.isValid()) throw TrajectoryIoError("timestamps not strictly increasing");
  return traj;
}

Trajectory loadTrajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TrajectoryIoError("cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (isBlank(line)) continue;
    const std::size_t columns = parseLine(line, line_no).size();
    if (columns == 12) return loadTrajectory(path, TrajectoryFormat::Kitti);
    if (columns == 8) return loadTrajectory(path, TrajectoryFormat::Tum);
    throw TrajectoryIoError(
        "unrecognized trajectory layout (" + std::to_string(columns) + " columns)", line_no);
  }
  throw TrajectoryIoError("no data lines in " + path.string());
}

void saveTrajectory(const Trajectory& traj, const std::filesystem::path& path,
                    TrajectoryFormat format) {
  std::ofstream out(path);
  if (!out) throw TrajectoryIoError("cannot write " + path.string());
  out.precision(17);
  for (const TrajectoryPoint& p : traj.points) {
    if (format == TrajectoryFormat::Kitti) {
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c) {
          if (r + c > 0) out << ' ';
          out << (c < 3 ? p.pose.R(r, c) : p.pose.t(r));
        }
    } else {
      const Eigen::Quaterniond q(p.pose.R);
      out << p.timestamp << ' ' << p.pose.t.x() << ' ' << p.pose.t.y() << ' ' << p.pose.t.z()
          << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << q.w();
    }
    out << '\n';
  }
  if (!out) throw TrajectoryIoError("write failed for " + path.string());
}

}  // namespace fslam
