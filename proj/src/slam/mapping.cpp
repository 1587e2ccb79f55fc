#include "fslam/slam/mapping.hpp"

#include <algorithm>
#include <map>
#include <vector>

#include "fslam/core/triangulation.hpp"
#include "fslam/features/matcher.hpp"

namespace fslam {

namespace {

Eigen::Matrix3d fundamentalFromPoses(const Pose& pose1, const Pose& pose2,
                                     const CameraIntrinsics& K) {
  const Pose T21 = compose(pose2, pose1.inverse());
  const Eigen::Matrix3d E = skew(T21.t) * T21.R;
  const Eigen::Matrix3d Kinv = K.K().inverse();
  return Kinv.transpose() * E * Kinv;
}

double epilineDistance(const Eigen::Matrix3d& F, const Eigen::Vector2d& p1,
                       const Eigen::Vector2d& p2) {
  const Eigen::Vector3d l = F * Eigen::Vector3d(p1.x(), p1.y(), 1.0);
  const double n = std::hypot(l.x(), l.y());
  if (n < 1e-15) return std::numeric_limits<double>::infinity();
  return std::abs(l.dot(Eigen::Vector3d(p2.x(), p2.y(), 1.0))) / n;
}

bool reprojectsWithinLinear(const Landmark& X, const Pose& pose, const CameraIntrinsics& K,
                            const Eigen::Vector2d& uv, double gate) {
  const Projection proj = project(X, pose, K);
  if (proj.status == ProjectionStatus::BehindCamera) return false;
  return (proj.uv - uv).norm() <= gate;
}

}  // namespace

void insertKeyframe(CovisibilityGraph& graph, std::uint64_t kf_id, const Vocabulary& vocab,
                    KeyframeDatabase& db, const MappingOptions& options) {
  graph.updateConnections(kf_id, options.covis_min_weight);
  graph.assignParent(kf_id);
  KeyFrame& kf = graph.keyframe(kf_id);
  if (!vocab.empty()) kf.bow = vocab.toBow(kf.descriptors);
  db.add(kf_id, kf.bow);
}

int createMapPoints(CovisibilityGraph& graph, std::uint64_t kf_id, const CameraIntrinsics& K,
                    const MappingOptions& options) {
  KeyFrame& kf1 = graph.keyframe(kf_id);
  std::vector<std::uint64_t> neighbors = graph.orderedNeighbors(kf_id);
  if (neighbors.size() > static_cast<std::size_t>(options.triangulation_neighbors))
    neighbors.resize(static_cast<std::size_t>(options.triangulation_neighbors));

  TriangulationOptions tri;
  tri.min_parallax_deg = options.min_parallax_deg;
  tri.min_baseline = options.min_baseline;

  int created = 0;
  for (std::uint64_t nb : neighbors) {
    KeyFrame& kf2 = graph.keyframe(nb);
    if ((kf1.pose.center() - kf2.pose.center()).norm() < options.min_baseline) continue;

    // Unassociated keypoints on both sides.
    std::vector<int> idx1, idx2;
    DescriptorSet d1 = kf1.descriptors.kind() == DescriptorKind::Binary
                           ? DescriptorSet::binary(kf1.descriptors.length())
                           : DescriptorSet::real(kf1.descriptors.length());
    DescriptorSet d2 = d1;
    for (std::size_t i = 0; i < kf1.point_ids.size(); ++i)
      if (kf1.point_ids[i] < 0) {
        idx1.push_back(static_cast<int>(i));
        d1.addRowFrom(kf1.descriptors, i);
      }
    for (std::size_t i = 0; i < kf2.point_ids.size(); ++i)
      if (kf2.point_ids[i] < 0) {
        idx2.push_back(static_cast<int>(i));
        d2.addRowFrom(kf2.descriptors, i);
      }
    if (idx1.empty() || idx2.empty()) continue;

    const Eigen::Matrix3d F = fundamentalFromPoses(kf1.pose, kf2.pose, K);
    const std::vector<Match> matches = matchDescriptors(d1, d2, options.thresholds, MatchMode::Strict);
    for (const Match& m : matches) {
      const int i1 = idx1[static_cast<std::size_t>(m.a)];
      const int i2 = idx2[static_cast<std::size_t>(m.b)];
      if (kf1.point_ids[static_cast<std::size_t>(i1)] >= 0 ||
          kf2.point_ids[static_cast<std::size_t>(i2)] >= 0)
        continue;  // bound by an earlier neighbor pass
      const Keypoint& k1 = kf1.keypoints[static_cast<std::size_t>(i1)];
      const Keypoint& k2 = kf2.keypoints[static_cast<std::size_t>(i2)];
      const Eigen::Vector2d p1(k1.x, k1.y);
      const Eigen::Vector2d p2(k2.x, k2.y);

      if (epilineDistance(F, p1, p2) > options.epipolar_gate * k2.scale) continue;
      const TriangulationResult tr = triangulate(p1, p2, kf1.pose, kf2.pose, K, tri);
      if (!tr.ok()) continue;
      if (!reprojectsWithinLinear(tr.point, kf1.pose, K, p1, options.reproj_gate * k1.scale))
        continue;
      if (!reprojectsWithinLinear(tr.point, kf2.pose, K, p2, options.reproj_gate * k2.scale))
        continue;

      const std::uint64_t pid = graph.createPoint(tr.point, kf_id);
      graph.addObservation(pid, kf_id, i1);
      graph.addObservation(pid, nb, i2);
      if (!kf1.truth_ids.empty())
        graph.point(pid).truth_id = kf1.truth_ids[static_cast<std::size_t>(i1)];
      graph.updatePointMeta(pid);
      ++created;
    }
  }
  if (created > 0) graph.updateConnections(kf_id, options.covis_min_weight);
  return created;
}

LocalBaSummary localBundleAdjustment(CovisibilityGraph& graph, std::uint64_t kf_id,
                                     const CameraIntrinsics& K, const MappingOptions& options) {
  LocalBaSummary summary;

  std::vector<std::uint64_t> window{kf_id};
  for (std::uint64_t nb : graph.orderedNeighbors(kf_id)) window.push_back(nb);
  std::sort(window.begin(), window.end());
  summary.window_size = static_cast<int>(window.size());
  if (window.size() < 2) return summary;
  const std::set<std::uint64_t> window_set(window.begin(), window.end());

  std::set<std::uint64_t> point_ids;
  for (std::uint64_t w : window)
    for (std::int64_t pid : graph.keyframe(w).point_ids)
      if (pid >= 0) point_ids.insert(static_cast<std::uint64_t>(pid));
  if (point_ids.empty()) return summary;

  std::set<std::uint64_t> anchor_ids;
  for (std::uint64_t pid : point_ids)
    for (const auto& [obs_kf, _] : graph.point(pid).observations)
      if (window_set.count(obs_kf) == 0) anchor_ids.insert(obs_kf);

  // Gauge: anchors pin the window; the world-origin keyframe stays fixed
  // whenever it participates; a window with nothing else fixed pins its
  // oldest member.
  std::set<std::uint64_t> fixed_ids = anchor_ids;
  if (window_set.count(0) != 0) fixed_ids.insert(0);
  if (fixed_ids.empty()) fixed_ids.insert(window.front());

  LocalBaProblem problem;
  problem.K = K;
  std::map<std::uint64_t, int> pose_index, fixed_index, point_index;
  for (std::uint64_t w : window) {
    if (fixed_ids.count(w) != 0) continue;
    pose_index[w] = static_cast<int>(problem.poses.size());
    problem.poses.push_back(graph.keyframe(w).pose);
  }
  for (std::uint64_t a : fixed_ids) {
    fixed_index[a] = static_cast<int>(problem.fixed_poses.size());
    problem.fixed_poses.push_back(graph.keyframe(a).pose);
  }
  for (std::uint64_t pid : point_ids) {
    point_index[pid] = static_cast<int>(problem.points.size());
    problem.points.push_back(graph.point(pid).position);
  }

  struct ObsRef {
    std::uint64_t pid;
    std::uint64_t kf;
  };
  std::vector<ObsRef> refs;
  for (std::uint64_t pid : point_ids) {
    for (const auto& [obs_kf, kp_idx] : graph.point(pid).observations) {
      const KeyFrame& kf = graph.keyframe(obs_kf);
      const Keypoint& kp = kf.keypoints[static_cast<std::size_t>(kp_idx)];
      BaObservation o;
      o.point = point_index.at(pid);
      o.uv = Eigen::Vector2d(kp.x, kp.y);
      o.sigma = kp.scale;
      if (fixed_ids.count(obs_kf) != 0) {
        o.camera = fixed_index.at(obs_kf);
        o.fixed_camera = true;
      } else {
        o.camera = pose_index.at(obs_kf);
        o.fixed_camera = false;
      }
      problem.observations.push_back(o);
      refs.push_back({pid, obs_kf});
    }
  }

  summary.ran = true;
  summary.anchor_count = static_cast<int>(anchor_ids.size());
  summary.point_count = static_cast<int>(point_ids.size());
  summary.result = solveLocalBa(problem, options.ba);

  for (const auto& [kf, idx] : pose_index)
    graph.keyframe(kf).pose = problem.poses[static_cast<std::size_t>(idx)];
  for (const auto& [pid, idx] : point_index)
    graph.point(pid).position = problem.points[static_cast<std::size_t>(idx)];

  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (summary.result.active[i]) continue;
    graph.removeObservation(refs[i].pid, refs[i].kf);
    ++summary.removed_observations;
  }

  for (std::uint64_t pid : point_ids)
    if (graph.hasPoint(pid)) graph.updatePointMeta(pid);
  if (summary.removed_observations > 0)
    for (std::uint64_t w : window)
      if (graph.hasKeyFrame(w)) graph.updateConnections(w, options.covis_min_weight);
  return summary;
}

CullStats cull(CovisibilityGraph& graph, const MappingOptions& options,
               const std::set<std::uint64_t>& protected_kfs, KeyframeDatabase* db) {
  CullStats stats;
  if (graph.keyframeCount() == 0) return stats;
  const std::uint64_t newest = graph.keyframes().rbegin()->first;

  for (std::uint64_t pid : graph.pointIds()) {
    const MapPoint& p = graph.point(pid);
    const bool stale_ratio = p.foundRatio() < options.min_found_ratio;
    const bool past_window =
        newest >= p.first_keyframe + static_cast<std::uint64_t>(options.point_creation_window);
    const bool under_observed = past_window && p.observationCount() < 2;
    if (stale_ratio || under_observed) {
      graph.erasePoint(pid);
      ++stats.points_removed;
    }
  }

  for (std::uint64_t kf_id : graph.keyframeIds()) {
    const KeyFrame& kf = graph.keyframe(kf_id);
    if (kf.parent < 0 || kf.loop_keyframe || kf_id == newest || protected_kfs.count(kf_id) != 0)
      continue;

    int total = 0;
    int redundant = 0;
    for (std::size_t i = 0; i < kf.point_ids.size(); ++i) {
      const std::int64_t pid = kf.point_ids[i];
      if (pid < 0) continue;
      ++total;
      const int octave = kf.keypoints[i].octave;
      int finer_observers = 0;
      for (const auto& [other_kf, other_idx] : graph.point(static_cast<std::uint64_t>(pid)).observations) {
        if (other_kf == kf_id) continue;
        const KeyFrame& other = graph.keyframe(other_kf);
        if (other.keypoints[static_cast<std::size_t>(other_idx)].octave <= octave) ++finer_observers;
      }
      if (finer_observers >= options.cull_min_observers) ++redundant;
    }
    if (total > 0 && static_cast<double>(redundant) >= options.cull_redundancy * total) {
      graph.eraseKeyFrame(kf_id);
      if (db) db->remove(kf_id);
      ++stats.keyframes_removed;
    }
  }
  return stats;
}

}  // namespace fslam
