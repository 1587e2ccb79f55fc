#pragma once

#include <cstdint>
#include <set>

#include "fslam/bow/database.hpp"
#include "fslam/bow/vocabulary.hpp"
#include "fslam/core/camera.hpp"
#include "fslam/map/covisibility_graph.hpp"
#include "fslam/optim/local_ba.hpp"

namespace fslam {

struct MappingOptions {
  int covis_min_weight = 15;
  int triangulation_neighbors = 10;  // strongest covisibility neighbors used
  double epipolar_gate = 3.84;       // point-to-epiline distance limit, x sigma_level
  double reproj_gate = 5.991;        // reprojection error limit, x sigma_level
  double min_parallax_deg = 1.0;
  double min_baseline = 1e-9;
  MatchThresholds thresholds;
  LocalBaOptions ba;
  double cull_redundancy = 0.90;  // fraction of points seen elsewhere
  int cull_min_observers = 3;     // "elsewhere" = this many other keyframes
  int point_creation_window = 3;  // keyframes of grace before the 2-observer rule
  double min_found_ratio = 0.25;
};

/// Covisibility edges, spanning-tree parent, BoW registration.
void insertKeyframe(CovisibilityGraph& graph, std::uint64_t kf_id, const Vocabulary& vocab,
                    KeyframeDatabase& db, const MappingOptions& options);

/// Triangulates new map points between the keyframe and its strongest
/// covisibility neighbors: epipolar-gated descriptor matching of
/// unassociated keypoints, then parallax / depth / reprojection checks.
/// Returns the number of points created.
int createMapPoints(CovisibilityGraph& graph, std::uint64_t kf_id, const CameraIntrinsics& K,
                    const MappingOptions& options);

struct LocalBaSummary {
  bool ran = false;  // false when the local window has < 2 keyframes
  int window_size = 0;
  int anchor_count = 0;
  int point_count = 0;
  int removed_observations = 0;
  LocalBaResult result;
};

/// Local bundle adjustment over the keyframe's covisibility window. External
/// observers of the window's points act as fixed anchors; chi2 outlier
/// observations are removed from the graph afterwards.
LocalBaSummary localBundleAdjustment(CovisibilityGraph& graph, std::uint64_t kf_id,
                                     const CameraIntrinsics& K, const MappingOptions& options);

struct CullStats {
  int points_removed = 0;
  int keyframes_removed = 0;
};

/// Map hygiene. Points go when their found/visible ratio drops below the
/// minimum, or when they still have fewer than 2 observers after the creation
/// window. Keyframes go when at least cull_redundancy of their points are
/// observed by cull_min_observers other keyframes at equal-or-finer scale.
/// The tree root, loop-closure keyframes, the newest keyframe, and the
/// protected set are never culled. db (optional) drops culled entries.
CullStats cull(CovisibilityGraph& graph, const MappingOptions& options,
               const std::set<std::uint64_t>& protected_kfs = {}, KeyframeDatabase* db = nullptr);

}  // namespace fslam
