#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fslam/core/camera.hpp"
#include "fslam/map/covisibility_graph.hpp"
#include "fslam/optim/motion_only.hpp"
#include "fslam/slam/frame.hpp"

namespace fslam {

struct TrackingOptions {
  MatchThresholds thresholds;
  double search_window = 15.0;  // px, map-point reprojection search radius
  MotionOnlyOptions motion;     // min_inliers doubles as the lost threshold
  int init_min_points = 50;
  int init_min_matches = 8;
  int init_max_gap = 30;  // frames to hold the init reference waiting for parallax
  double min_parallax_deg = 1.0;
  int keyframe_gap = 20;         // frames since last keyframe forcing insertion
  double keyframe_ratio = 0.9;   // tracked inliers vs reference keyframe points
  int covis_min_weight = 15;     // edge threshold applied to the bootstrap pair
};

enum class InitStatus { Ok, InsufficientMatches, NoConsensus, InsufficientPoints };

struct InitResult {
  InitStatus status = InitStatus::InsufficientMatches;
  std::uint64_t kf1 = 0;
  std::uint64_t kf2 = 0;
  Pose pose1;  // identity
  Pose pose2;  // scale-normalized relative pose
  int created_points = 0;

  bool ok() const { return status == InitStatus::Ok; }
};

/// Two-view bootstrap: relaxed matching, essential-matrix RANSAC,
/// triangulation of the inliers, scale normalization to unit median depth.
/// On success both frames enter the graph as keyframes with observations
/// bound; on failure the graph is untouched.
InitResult initializeMap(const Frame& f1, const Frame& f2, const CameraIntrinsics& K,
                         CovisibilityGraph& graph, const TrackingOptions& options,
                         std::uint64_t seed);

struct TrackResult {
  bool lost = true;
  Pose pose;
  int inlier_count = 0;
  int matched_points = 0;
  /// Surviving 2D-3D associations: (map point id, frame keypoint index).
  std::vector<std::pair<std::uint64_t, int>> associations;
  MotionOnlyResult optimization;
};

/// Projects the local map (reference keyframe + covisibility neighborhood)
/// into the frame under the predicted pose, gathers window-constrained
/// descriptor matches, and refines the pose with motion-only optimization.
/// Updates the found/visible counters of the involved map points.
TrackResult trackFrame(const Frame& frame, const Pose& predicted, CovisibilityGraph& graph,
                       std::uint64_t reference_kf, const CameraIntrinsics& K,
                       const TrackingOptions& options);

struct KeyframeDecisionInput {
  int frames_since_keyframe = 0;
  int inlier_count = 0;
  int reference_point_count = 0;
  bool mapping_idle = true;
};

/// True when (the frame gap is exceeded OR tracking covers less than the
/// configured ratio of the reference keyframe) AND tracking is healthy AND
/// mapping can accept work.
bool needKeyframe(const KeyframeDecisionInput& input, const TrackingOptions& options);

}  // namespace fslam
