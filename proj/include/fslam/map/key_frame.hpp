#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "fslam/bow/bow_vector.hpp"
#include "fslam/core/pose.hpp"
#include "fslam/features/types.hpp"

namespace fslam {

/// A frame promoted into the map. Covisibility edges carry shared-map-point
/// counts and are kept symmetric by the graph. parent/children form the
/// spanning tree used for pose-graph correction.
struct KeyFrame {
  std::uint64_t id = 0;
  std::uint64_t frame_id = 0;
  double timestamp = 0.0;
  Pose pose;  // world -> camera

  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;
  /// Map point id per keypoint; -1 when the keypoint is unassociated.
  std::vector<std::int64_t> point_ids;
  /// Ground-truth landmark ids on synthetic input (audit only; may be empty).
  std::vector<std::int64_t> truth_ids;

  BowVector bow;

  std::map<std::uint64_t, int> edges;  // neighbor keyframe id -> shared count
  std::int64_t parent = -1;            // -1 on the tree root
  std::set<std::uint64_t> children;

  bool loop_keyframe = false;           // participated in a loop closure; never culled
  std::set<std::uint64_t> loop_edges;  // accepted loop-closure partners

  int associatedPointCount() const {
    int n = 0;
    for (std::int64_t p : point_ids)
      if (p >= 0) ++n;
    return n;
  }
};

}  // namespace fslam
