#pragma once

#include <filesystem>
#include <vector>

#include "fslam/io/sequence.hpp"

namespace fslam {

/// EuRoC MAV ASL layout. `root` is the sequence directory containing mav0/
/// (or mav0/ itself). Frames come from cam0/data.csv (nanosecond timestamps,
/// converted to seconds) with images under cam0/data/; calibration from
/// cam0/sensor.yaml (pinhole intrinsics [fu fv cu cv] and the camera-to-body
/// extrinsic T_BS). Ground truth, when state_groundtruth_estimate0/data.csv
/// exists, is the body trajectory composed with T_BS so the emitted poses are
/// camera-to-world.
class EurocSource final : public SequenceSource {
 public:
  explicit EurocSource(const std::filesystem::path& root);

  std::size_t size() const override { return image_paths_.size(); }
  SequenceFrame frame(std::size_t index) const override;
  const CameraIntrinsics& intrinsics() const override { return camera_; }
  const std::optional<Trajectory>& groundTruth() const override { return truth_; }

  const Pose& cameraToBody() const { return T_BS_; }

 private:
  std::vector<std::filesystem::path> image_paths_;
  std::vector<double> times_;
  CameraIntrinsics camera_;
  Pose T_BS_;
  std::optional<Trajectory> truth_;
};

}  // namespace fslam
