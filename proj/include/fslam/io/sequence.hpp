#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fslam/core/camera.hpp"
#include "fslam/core/trajectory.hpp"
#include "fslam/features/types.hpp"
#include "fslam/imaging/image.hpp"

namespace fslam {

/// One sequence element: either an image (real datasets) or precomputed
/// features (synthetic generator / external feature files).
struct SequenceFrame {
  std::uint64_t id = 0;
  double timestamp = 0.0;

  GrayImage image;

  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;
  std::vector<std::int64_t> truth_ids;  // synthetic audit ids; empty otherwise

  bool hasImage() const { return !image.empty(); }
  bool hasFeatures() const { return !keypoints.empty(); }
};

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { MissingFiles, MalformedCalibration, CountMismatch, Malformed };
  DatasetError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Lazy, order-stable frame source with calibration and optional ground
/// truth. frame(i) may read from disk; implementations hold no mutable
/// shared state beyond the file handles they open per call.
class SequenceSource {
 public:
  virtual ~SequenceSource() = default;
  virtual std::size_t size() const = 0;
  virtual SequenceFrame frame(std::size_t index) const = 0;
  virtual const CameraIntrinsics& intrinsics() const = 0;
  virtual const std::optional<Trajectory>& groundTruth() const = 0;
};

}  // namespace fslam
