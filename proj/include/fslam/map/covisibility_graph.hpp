#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fslam/map/key_frame.hpp"
#include "fslam/map/map_point.hpp"

namespace fslam {

/// Keyframes + map points + covisibility edges + spanning tree. All mutation
/// goes through this class so both sides of every relation stay in sync.
/// Containers are ordered maps: iteration order (and therefore every
/// derived computation) is deterministic.
class CovisibilityGraph {
 public:
  bool hasKeyFrame(std::uint64_t id) const { return kfs_.count(id) != 0; }
  bool hasPoint(std::uint64_t id) const { return pts_.count(id) != 0; }
  KeyFrame& keyframe(std::uint64_t id) { return kfs_.at(id); }
  const KeyFrame& keyframe(std::uint64_t id) const { return kfs_.at(id); }
  MapPoint& point(std::uint64_t id) { return pts_.at(id); }
  const MapPoint& point(std::uint64_t id) const { return pts_.at(id); }
  const std::map<std::uint64_t, KeyFrame>& keyframes() const { return kfs_; }
  const std::map<std::uint64_t, MapPoint>& points() const { return pts_; }
  std::size_t keyframeCount() const { return kfs_.size(); }
  std::size_t pointCount() const { return pts_.size(); }

  /// Adds the keyframe under a fresh id (returned). point_ids is resized to
  /// the keypoint count; any pre-set associations are registered.
  std::uint64_t addKeyFrame(KeyFrame kf);

  /// Creates an empty-observation point at the given position.
  std::uint64_t createPoint(const Eigen::Vector3d& position, std::uint64_t first_keyframe);

  /// Binds point <-> (keyframe, keypoint index), displacing any previous
  /// association of either side.
  void addObservation(std::uint64_t point_id, std::uint64_t kf_id, int kp_index);

  /// Unbinds one observation; erases the point if none remain.
  void removeObservation(std::uint64_t point_id, std::uint64_t kf_id);

  void erasePoint(std::uint64_t point_id);

  /// Removes the keyframe: drops its observations, re-parents its children to
  /// its own parent (first child becomes root when the root dies), detaches
  /// covisibility edges.
  void eraseKeyFrame(std::uint64_t kf_id);

  /// Recomputes this keyframe's covisibility edges from shared map points.
  /// Neighbors with >= min_weight shared points get symmetric edges; when no
  /// neighbor reaches the threshold the single strongest sharing neighbor is
  /// still connected so the graph stays usable.
  void updateConnections(std::uint64_t kf_id, int min_weight);

  /// Sets the spanning-tree parent to the highest-weight covisibility
  /// neighbor (ties -> smallest id). No-op if a parent is already set or the
  /// keyframe has no edges.
  void assignParent(std::uint64_t kf_id);

  /// Recomputes representative descriptor (observation descriptor minimizing
  /// the median distance to the others) and the mean viewing direction.
  void updatePointMeta(std::uint64_t point_id);

  /// Moves drop's observations into keep (slots already bound to keep are
  /// released), merges counters, erases drop.
  void fusePoints(std::uint64_t keep_id, std::uint64_t drop_id);

  /// Neighbor ids ordered by descending edge weight, ascending id on ties.
  std::vector<std::uint64_t> orderedNeighbors(std::uint64_t kf_id) const;

  /// Brute-force shared-map-point count between two keyframes.
  int sharedPointCount(std::uint64_t a, std::uint64_t b) const;

  std::vector<std::uint64_t> keyframeIds() const;
  std::vector<std::uint64_t> pointIds() const;

  /// Full referential-integrity sweep: observation back-references, edge
  /// symmetry and endpoint liveness, spanning-tree shape. Returns true when
  /// clean; otherwise fills `why` with the first violation.
  bool checkIntegrity(std::string* why = nullptr) const;

 private:
  friend struct MapSnapshotAccess;  // snapshot deserialization restores ids verbatim

  std::map<std::uint64_t, KeyFrame> kfs_;
  std::map<std::uint64_t, MapPoint> pts_;
  std::uint64_t next_kf_ = 0;
  std::uint64_t next_pt_ = 0;
};

}  // namespace fslam
