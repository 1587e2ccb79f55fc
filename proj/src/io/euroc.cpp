#include "fslam/io/euroc.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace fslam {

namespace fs = std::filesystem;

namespace {

// Parses one CSV data row into doubles; returns false for headers/blanks.
bool parseCsvRow(const std::string& line, std::vector<double>& out) {
  if (line.empty() || line[0] == '#') return false;
  out.clear();
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out.empty();
}

}  // namespace

EurocSource::EurocSource(const fs::path& root) {
  fs::path mav = root / "mav0";
  if (!fs::is_directory(mav)) mav = root;
  const fs::path cam = mav / "cam0";
  const fs::path data_csv = cam / "data.csv";
  if (!fs::is_regular_file(data_csv))
    throw DatasetError(DatasetError::Kind::MissingFiles, "no cam0/data.csv under " + mav.string());

  std::ifstream in(data_csv);
  std::string line;
  std::vector<std::pair<double, fs::path>> rows;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DatasetError(DatasetError::Kind::Malformed, data_csv.string() + ": bad row: " + line);
    double ts_ns;
    try {
      ts_ns = std::stod(line.substr(0, comma));
    } catch (const std::exception&) {
      throw DatasetError(DatasetError::Kind::Malformed, data_csv.string() + ": bad row: " + line);
    }
    rows.emplace_back(ts_ns * 1e-9, cam / "data" / line.substr(comma + 1));
  }
  if (rows.empty())
    throw DatasetError(DatasetError::Kind::MissingFiles, data_csv.string() + ": no frames");
  std::sort(rows.begin(), rows.end());
  for (auto& [ts, path] : rows) {
    times_.push_back(ts);
    image_paths_.push_back(std::move(path));
  }

  const fs::path sensor_yaml = cam / "sensor.yaml";
  YAML::Node sensor;
  try {
    sensor = YAML::LoadFile(sensor_yaml.string());
  } catch (const YAML::Exception& e) {
    throw DatasetError(DatasetError::Kind::MalformedCalibration,
                       sensor_yaml.string() + ": " + e.what());
  }
  try {
    const auto intr = sensor["intrinsics"];
    const auto res = sensor["resolution"];
    camera_.fx = intr[0].as<double>();
    camera_.fy = intr[1].as<double>();
    camera_.cx = intr[2].as<double>();
    camera_.cy = intr[3].as<double>();
    camera_.width = res[0].as<int>();
    camera_.height = res[1].as<int>();
    const auto data = sensor["T_BS"]["data"];
    Eigen::Matrix3d R;
    Eigen::Vector3d t;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) R(r, c) = data[r * 4 + c].as<double>();
      t(r) = data[r * 4 + 3].as<double>();
    }
    T_BS_ = Pose(R, t);
  } catch (const YAML::Exception& e) {
    throw DatasetError(DatasetError::Kind::MalformedCalibration,
                       sensor_yaml.string() + ": " + e.what());
  }
  if (!camera_.isValid())
    throw DatasetError(DatasetError::Kind::MalformedCalibration,
                       sensor_yaml.string() + ": invalid intrinsics");

  const fs::path truth_csv = mav / "state_groundtruth_estimate0" / "data.csv";
  if (fs::is_regular_file(truth_csv)) {
    std::ifstream tin(truth_csv);
    Trajectory truth;
    std::vector<double> v;
    long row_id = 0;
    while (std::getline(tin, line)) {
      if (!parseCsvRow(line, v)) continue;
      if (v.size() < 8)
        throw DatasetError(DatasetError::Kind::Malformed,
                           truth_csv.string() + ": expected >= 8 columns");
      const Eigen::Vector3d p(v[1], v[2], v[3]);
      const Eigen::Quaterniond q(v[4], v[5], v[6], v[7]);  // w x y z
      const Pose T_WB(q.normalized().toRotationMatrix(), p);
      truth.points.push_back({v[0] * 1e-9, compose(T_WB, T_BS_), row_id++});
    }
    if (truth.empty())
      throw DatasetError(DatasetError::Kind::Malformed, truth_csv.string() + ": no poses");
    truth_ = std::move(truth);
  }
}

SequenceFrame EurocSource::frame(std::size_t index) const {
  SequenceFrame out;
  out.id = index;
  out.timestamp = times_[index];
  try {
    out.image = loadImage(image_paths_[index]);
  } catch (const ImageIoError& e) {
    throw DatasetError(DatasetError::Kind::MissingFiles,
                       image_paths_[index].string() + ": " + e.what());
  }
  return out;
}

}  // namespace fslam
