#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fslam/bow/database.hpp"
#include "fslam/bow/vocabulary.hpp"
#include "fslam/core/camera.hpp"
#include "fslam/map/covisibility_graph.hpp"
#include "fslam/optim/sim3_pose_graph.hpp"
#include "fslam/slam/frame.hpp"

namespace fslam {

struct LoopOptions {
  int min_database_size = 10;
  int consistency_required = 3;  // consecutive keyframes re-detecting the group
  int min_inliers = 20;          // similarity-RANSAC acceptance floor
  int ransac_iterations = 200;
  double ransac_chi2 = 9.21;  // squared pixel gate per direction, x sigma^2
  bool fix_scale = false;     // freeze scale = 1 in the loop similarity
  MatchThresholds thresholds;
  double fuse_radius = 0.01;
  int covis_min_weight = 15;       // graph edge threshold when reconnecting after fusion
  int essential_min_weight = 100;  // covisibility weight entering the essential graph
  Sim3PoseGraphOptions pose_graph;
  int reloc_min_inliers = 15;
  int reloc_max_candidates = 5;
  std::uint64_t seed = 1;
};

struct LoopCandidate {
  std::uint64_t query = 0;
  std::uint64_t match = 0;
  double score = 0.0;
  int consistency = 0;
};

/// Stateful detector implementing the consecutive-keyframe group-consistency
/// rule. Baseline score = the minimum BoW similarity between the query and
/// its covisibility neighbors; database hits below it are ignored.
class LoopDetector {
 public:
  explicit LoopDetector(const LoopOptions& options = {}) : options_(options) {}

  std::optional<LoopCandidate> detect(const CovisibilityGraph& graph, const KeyframeDatabase& db,
                                      std::uint64_t kf_id);
  void reset() { prev_groups_.clear(); }
  const LoopOptions& options() const { return options_; }

 private:
  struct ConsistentGroup {
    std::set<std::uint64_t> members;
    int count = 1;
  };
  LoopOptions options_;
  std::vector<ConsistentGroup> prev_groups_;
};

struct LoopTransform {
  SimTransform similarity;  // maps match-keyframe camera coords to query-keyframe camera coords
  int inlier_count = 0;
  /// Surviving map-point pairs: (query-side point id, match-side point id).
  std::vector<std::pair<std::uint64_t, std::uint64_t>> inlier_pairs;
};

/// 7-DoF (or 6-DoF under fix_scale) similarity between the candidate
/// keyframes from their shared map points: descriptor matching, then
/// 3-point closed-form alignment inside RANSAC with a two-directional
/// reprojection gate. Empty when the consensus stays below min_inliers.
std::optional<LoopTransform> computeLoopTransform(const CovisibilityGraph& graph,
                                                  const LoopCandidate& candidate,
                                                  const CameraIntrinsics& K,
                                                  const LoopOptions& options);

struct LoopCorrectionStats {
  int corrected_keyframes = 0;
  int fused_points = 0;
  double loop_residual_before = 0.0;  // squared loop-edge residual at the drifted poses
  double loop_residual_after = 0.0;   // same edge after correction + pose graph
  Sim3PoseGraphResult pose_graph;
};

/// Applies the loop: propagates the corrected similarity through the query's
/// covisibility group, fuses duplicate map points, then optimizes a Sim(3)
/// pose graph over the essential graph (spanning tree + high-weight
/// covisibility edges + loop edges) with the match keyframe held fixed.
LoopCorrectionStats correctLoop(CovisibilityGraph& graph, const LoopCandidate& candidate,
                                const LoopTransform& transform, const LoopOptions& options);

/// BoW-candidate + PnP-RANSAC + motion-only-refinement relocalization.
/// Returns the recovered pose when some candidate yields at least
/// reloc_min_inliers refined inliers.
std::optional<Pose> relocalize(const Frame& frame, const Vocabulary& vocab,
                               const KeyframeDatabase& db, CovisibilityGraph& graph,
                               const CameraIntrinsics& K, const LoopOptions& options);

}  // namespace fslam
