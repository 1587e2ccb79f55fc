#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fslam/io/sequence.hpp"

namespace fslam {

enum class SyntheticPath { Line, Arc, Loop };

/// IdExact: landmark-unique binary descriptors (geometry tests match
/// perfectly). NoisyReal: per-landmark unit real vectors plus per-observation
/// noise with a controlled inter-class margin (exercises the matcher gates).
/// Rendered: no feature emission — frames carry imagery of a procedurally
/// textured floor + wall, for runs through the built-in extractor.
enum class DescriptorRegime { IdExact, NoisyReal, Rendered };

struct SyntheticSceneConfig {
  int landmark_count = 500;
  Eigen::Vector3d box_min = {-4.0, -4.0, -1.5};
  Eigen::Vector3d box_max = {4.0, 4.0, 1.5};
  SyntheticPath path = SyntheticPath::Arc;
  int frame_count = 100;
  double pixel_sigma = 0.0;
  double outlier_rate = 0.0;
  DescriptorRegime regime = DescriptorRegime::IdExact;

  int descriptor_dim = 32;          // noisy-real regime
  double descriptor_noise = 0.005;  // per-component sigma before renormalization
  double fps = 10.0;

  bool isValid() const {
    return landmark_count >= 0 && frame_count >= 1 && pixel_sigma >= 0.0 && outlier_rate >= 0.0 &&
           outlier_rate < 1.0 && descriptor_dim >= 2 && fps > 0.0 &&
           (box_max - box_min).minCoeff() > 0.0;
  }
};

CameraIntrinsics defaultSyntheticCamera();  // 640x480, f = 500, centered

/// YAML scene description; see docs/formats.md for the schema.
SyntheticSceneConfig loadSceneConfig(const std::filesystem::path& path);

/// Deterministic synthetic sequence. Landmarks are drawn uniformly in the
/// box; the camera follows the configured path (line: lateral sweep facing
/// the box; arc: 150 degrees around it facing the center; loop: a full
/// circle inside it facing outward, revisiting its start). Frame emission is
/// seeded per (seed, index), so frames can be generated lazily in any order.
class SyntheticSource final : public SequenceSource {
 public:
  SyntheticSource(const SyntheticSceneConfig& config, std::uint64_t seed);

  std::size_t size() const override { return static_cast<std::size_t>(config_.frame_count); }
  SequenceFrame frame(std::size_t index) const override;
  const CameraIntrinsics& intrinsics() const override { return camera_; }
  const std::optional<Trajectory>& groundTruth() const override { return truth_; }

  const SyntheticSceneConfig& config() const { return config_; }
  const std::vector<Eigen::Vector3d>& landmarks() const { return landmarks_; }
  /// Ground-truth world->camera pose of a frame.
  Pose poseCw(std::size_t index) const;

 private:
  SequenceFrame renderFrame(std::size_t index) const;

  SyntheticSceneConfig config_;
  std::uint64_t seed_;
  CameraIntrinsics camera_;
  std::vector<Eigen::Vector3d> landmarks_;
  DescriptorSet bases_;  // per-landmark descriptors (id-exact / noisy-real)
  std::optional<Trajectory> truth_;
};

/// The per-landmark binary signature of the id-exact regime (256 bits,
/// derived from the landmark id alone).
void appendIdDescriptor(DescriptorSet& set, std::int64_t landmark_id);

}  // namespace fslam
