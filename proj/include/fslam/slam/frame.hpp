#pragma once

#include <cstdint>
#include <vector>

#include "fslam/core/pose.hpp"
#include "fslam/features/types.hpp"

namespace fslam {

struct Frame {
  std::uint64_t id = 0;
  double timestamp = 0.0;
  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;
  Pose pose;               // world -> camera, meaningful once tracked
  bool is_keyframe = false;

  /// Ground-truth landmark id per keypoint on synthetic sequences (-1 or
  /// empty otherwise). Never consumed by the pipeline, only by audits.
  std::vector<std::int64_t> truth_ids;
};

/// Constant-velocity model: motion from frame t-2 to t-1, applied on top of
/// the previous pose to predict frame t.
struct VelocityModel {
  Pose last_relative;
  bool valid = false;
};

inline Pose predictPose(const Pose& prev, const VelocityModel& vel) {
  return vel.valid ? compose(vel.last_relative, prev) : prev;
}

enum class TrackingStatus { NotInitialized, Tracking, Lost };

struct TrackingState {
  TrackingStatus status = TrackingStatus::NotInitialized;
  std::int64_t reference_keyframe = -1;
  int inlier_count = 0;
};

}  // namespace fslam
