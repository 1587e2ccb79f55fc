#include "fslam/io/kitti.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "fslam/io/trajectory_io.hpp"

namespace fslam {

namespace fs = std::filesystem;

namespace {

std::vector<double> readTimes(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(DatasetError::Kind::MissingFiles, "cannot open " + path.string());
  std::vector<double> times;
  double t;
  while (in >> t) times.push_back(t);
  return times;
}

CameraIntrinsics readCalib(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError(DatasetError::Kind::MissingFiles, "cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    if (tag != "P0:" && tag != "P0") continue;
    std::vector<double> p;
    double v;
    while (row >> v) p.push_back(v);
    if (p.size() != 12)
      throw DatasetError(DatasetError::Kind::MalformedCalibration,
                         path.string() + ": P0 needs 12 values, got " + std::to_string(p.size()));
    CameraIntrinsics K;
    K.fx = p[0];
    K.cx = p[2];
    K.fy = p[5];
    K.cy = p[6];
    return K;
  }
  throw DatasetError(DatasetError::Kind::MalformedCalibration, path.string() + ": no P0 row");
}

}  // namespace

KittiSource::KittiSource(const fs::path& root, const std::string& sequence) {
  fs::path seq_dir = root / "sequences" / sequence;
  if (!fs::is_directory(seq_dir)) seq_dir = root;
  const fs::path image_dir = seq_dir / "image_0";
  if (!fs::is_directory(image_dir))
    throw DatasetError(DatasetError::Kind::MissingFiles, "no image_0/ under " + seq_dir.string());

  for (const auto& entry : fs::directory_iterator(image_dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm"))
      image_paths_.push_back(entry.path());
  }
  std::sort(image_paths_.begin(), image_paths_.end());
  if (image_paths_.empty())
    throw DatasetError(DatasetError::Kind::MissingFiles, "no images in " + image_dir.string());

  times_ = readTimes(seq_dir / "times.txt");
  if (times_.size() != image_paths_.size())
    throw DatasetError(DatasetError::Kind::CountMismatch,
                       "times.txt has " + std::to_string(times_.size()) + " entries for " +
                           std::to_string(image_paths_.size()) + " images");

  camera_ = readCalib(seq_dir / "calib.txt");
  const GrayImage first = loadImage(image_paths_.front());
  camera_.width = first.width;
  camera_.height = first.height;
  if (!camera_.isValid())
    throw DatasetError(DatasetError::Kind::MalformedCalibration, "invalid P0 calibration");

  fs::path poses = root / "poses" / (sequence + ".txt");
  if (!fs::is_regular_file(poses)) poses = seq_dir / "poses.txt";
  if (fs::is_regular_file(poses)) {
    Trajectory truth;
    try {
      truth = loadTrajectory(poses, TrajectoryFormat::Kitti);
    } catch (const TrajectoryIoError& e) {
      throw DatasetError(DatasetError::Kind::Malformed, poses.string() + ": " + e.what());
    }
    if (truth.size() != image_paths_.size())
      throw DatasetError(DatasetError::Kind::CountMismatch,
                         poses.string() + " has " + std::to_string(truth.size()) +
                             " poses for " + std::to_string(image_paths_.size()) + " images");
    for (std::size_t i = 0; i < truth.size(); ++i) truth.points[i].timestamp = times_[i];
    truth_ = std::move(truth);
  }
}

SequenceFrame KittiSource::frame(std::size_t index) const {
  SequenceFrame out;
  out.id = index;
  out.timestamp = times_[index];
  try {
    out.image = loadImage(image_paths_[index]);
  } catch (const ImageIoError& e) {
    throw DatasetError(DatasetError::Kind::Malformed,
                       image_paths_[index].string() + ": " + e.what());
  }
  return out;
}

}  // namespace fslam
