#pragma once

#include <filesystem>
#include <vector>

#include "fslam/io/sequence.hpp"

namespace fslam {

/// KITTI odometry layout. `root` is either the dataset root (containing
/// sequences/<id>/ and optionally poses/<id>.txt) or a sequence directory
/// itself; `sequence` is the zero-padded id ("00".."21"). The sequence
/// directory must hold image_0/ (grayscale left camera), times.txt and
/// calib.txt (P0 row). Ground truth, when present, comes from
/// poses/<id>.txt next to sequences/ or poses.txt inside the sequence
/// directory, with timestamps taken from times.txt.
class KittiSource final : public SequenceSource {
 public:
  KittiSource(const std::filesystem::path& root, const std::string& sequence);

  std::size_t size() const override { return image_paths_.size(); }
  SequenceFrame frame(std::size_t index) const override;
  const CameraIntrinsics& intrinsics() const override { return camera_; }
  const std::optional<Trajectory>& groundTruth() const override { return truth_; }

  double timestamp(std::size_t index) const { return times_[index]; }

 private:
  std::vector<std::filesystem::path> image_paths_;
  std::vector<double> times_;
  CameraIntrinsics camera_;
  std::optional<Trajectory> truth_;
};

}  // namespace fslam
