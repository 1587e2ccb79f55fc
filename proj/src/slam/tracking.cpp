#include "fslam/slam/tracking.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "fslam/core/triangulation.hpp"
#include "fslam/core/two_view.hpp"
#include "fslam/features/matcher.hpp"

namespace fslam {

namespace {

KeyFrame keyframeFromFrame(const Frame& f, const Pose& pose) {
  KeyFrame kf;
  kf.frame_id = f.id;
  kf.timestamp = f.timestamp;
  kf.pose = pose;
  kf.keypoints = f.keypoints;
  kf.descriptors = f.descriptors;
  kf.truth_ids = f.truth_ids;
  return kf;
}

bool reprojectsWithin(const Landmark& X, const Pose& pose, const CameraIntrinsics& K,
                      const Eigen::Vector2d& uv, double sigma, double chi2) {
  const Projection proj = project(X, pose, K);
  if (proj.status == ProjectionStatus::BehindCamera) return false;
  return (proj.uv - uv).squaredNorm() <= chi2 * sigma * sigma;
}

}  // namespace

InitResult initializeMap(const Frame& f1, const Frame& f2, const CameraIntrinsics& K,
                         CovisibilityGraph& graph, const TrackingOptions& options,
                         std::uint64_t seed) {
  InitResult result;

  const std::vector<Match> matches =
      matchDescriptors(f1.descriptors, f2.descriptors, options.thresholds, MatchMode::Relaxed);
  if (static_cast<int>(matches.size()) < options.init_min_matches) {
    result.status = InitStatus::InsufficientMatches;
    return result;
  }

  std::vector<PixelMatch> pixel_matches;
  pixel_matches.reserve(matches.size());
  for (const Match& m : matches)
    pixel_matches.push_back({{f1.keypoints[static_cast<std::size_t>(m.a)].x,
                              f1.keypoints[static_cast<std::size_t>(m.a)].y},
                             {f2.keypoints[static_cast<std::size_t>(m.b)].x,
                              f2.keypoints[static_cast<std::size_t>(m.b)].y}});

  RansacConfig ransac;
  ransac.seed = seed;
  // Sampson gate in normalized coordinates equivalent to the sqrt(5.991) px
  // gate used by the triangulation and tracking chi-square tests.
  ransac.inlier_threshold = 2.45 / (0.5 * (K.fx + K.fy));
  const TwoViewResult two_view = estimateTwoView(pixel_matches, K, ransac);
  if (!two_view.ok()) {
    result.status = InitStatus::NoConsensus;
    return result;
  }

  const Pose pose1;  // identity: the first frame anchors the world
  Pose pose2 = two_view.relative;

  TriangulationOptions tri;
  tri.min_parallax_deg = options.min_parallax_deg;

  struct Created {
    Landmark X;
    int idx1;
    int idx2;
  };
  std::vector<Created> created;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    if (!two_view.inliers[i]) continue;
    const Match& m = matches[i];
    const Keypoint& k1 = f1.keypoints[static_cast<std::size_t>(m.a)];
    const Keypoint& k2 = f2.keypoints[static_cast<std::size_t>(m.b)];
    const TriangulationResult tr =
        triangulate(pixel_matches[i].p1, pixel_matches[i].p2, pose1, pose2, K, tri);
    if (!tr.ok()) continue;
    const double chi2 = 5.991;
    if (!reprojectsWithin(tr.point, pose1, K, pixel_matches[i].p1, k1.scale, chi2)) continue;
    if (!reprojectsWithin(tr.point, pose2, K, pixel_matches[i].p2, k2.scale, chi2)) continue;
    created.push_back({tr.point, m.a, m.b});
  }
  if (static_cast<int>(created.size()) < options.init_min_points) {
    result.status = InitStatus::InsufficientPoints;
    return result;
  }

  // Monocular scale gauge: unit median depth in the first camera.
  std::vector<double> depths;
  depths.reserve(created.size());
  for (const Created& c : created) depths.push_back(c.X.z());
  std::nth_element(depths.begin(), depths.begin() + static_cast<std::ptrdiff_t>(depths.size() / 2),
                   depths.end());
  const double median = depths[depths.size() / 2];
  if (median <= 1e-12) {
    result.status = InitStatus::NoConsensus;
    return result;
  }
  const double inv_median = 1.0 / median;
  for (Created& c : created) c.X *= inv_median;
  pose2.t *= inv_median;

  const std::uint64_t kf1 = graph.addKeyFrame(keyframeFromFrame(f1, pose1));
  const std::uint64_t kf2 = graph.addKeyFrame(keyframeFromFrame(f2, pose2));
  for (const Created& c : created) {
    const std::uint64_t pid = graph.createPoint(c.X, kf1);
    graph.addObservation(pid, kf1, c.idx1);
    graph.addObservation(pid, kf2, c.idx2);
    if (!f1.truth_ids.empty())
      graph.point(pid).truth_id = f1.truth_ids[static_cast<std::size_t>(c.idx1)];
    graph.updatePointMeta(pid);
  }
  graph.updateConnections(kf2, options.covis_min_weight);
  graph.assignParent(kf2);

  result.status = InitStatus::Ok;
  result.kf1 = kf1;
  result.kf2 = kf2;
  result.pose1 = pose1;
  result.pose2 = pose2;
  result.created_points = static_cast<int>(created.size());
  return result;
}

TrackResult trackFrame(const Frame& frame, const Pose& predicted, CovisibilityGraph& graph,
                       std::uint64_t reference_kf, const CameraIntrinsics& K,
                       const TrackingOptions& options) {
  TrackResult result;
  result.pose = predicted;
  if (!graph.hasKeyFrame(reference_kf)) return result;

  // Local map: the reference keyframe's covisibility neighborhood.
  std::set<std::uint64_t> local_points;
  {
    std::vector<std::uint64_t> local_kfs{reference_kf};
    for (std::uint64_t nb : graph.orderedNeighbors(reference_kf)) local_kfs.push_back(nb);
    for (std::uint64_t kf_id : local_kfs)
      for (std::int64_t pid : graph.keyframe(kf_id).point_ids)
        if (pid >= 0) local_points.insert(static_cast<std::uint64_t>(pid));
  }
  if (local_points.empty()) return result;

  const DescriptorKind kind = frame.descriptors.kind();
  const double gate = options.thresholds.effectiveHigh(kind);
  const double window2 = options.search_window * options.search_window;

  // Window-constrained projective matching, best map point per keypoint.
  struct Hit {
    std::uint64_t pid;
    double distance;
  };
  std::map<int, Hit> by_keypoint;
  std::vector<std::uint64_t> projected;
  for (std::uint64_t pid : local_points) {
    MapPoint& p = graph.point(pid);
    if (p.descriptor.empty()) continue;
    const Projection proj = project(p.position, predicted, K);
    if (!proj.ok()) continue;
    ++p.visible;
    projected.push_back(pid);

    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    int best_idx = -1;
    for (std::size_t k = 0; k < frame.keypoints.size(); ++k) {
      const Eigen::Vector2d uv(frame.keypoints[k].x, frame.keypoints[k].y);
      if ((uv - proj.uv).squaredNorm() > window2) continue;
      const double d = p.descriptor.distance(0, frame.descriptors, k);
      if (d < best) {
        second = best;
        best = d;
        best_idx = static_cast<int>(k);
      } else if (d < second) {
        second = d;
      }
    }
    if (best_idx < 0 || best > gate) continue;
    if (std::isfinite(second) && best >= options.thresholds.ratio * second) continue;

    auto it = by_keypoint.find(best_idx);
    if (it == by_keypoint.end() || best < it->second.distance) by_keypoint[best_idx] = {pid, best};
  }

  result.matched_points = static_cast<int>(by_keypoint.size());
  if (by_keypoint.empty()) return result;

  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector2d> obs;
  std::vector<double> sigmas;
  std::vector<std::pair<std::uint64_t, int>> pairs;
  for (const auto& [kp_idx, hit] : by_keypoint) {
    points.push_back(graph.point(hit.pid).position);
    obs.emplace_back(frame.keypoints[static_cast<std::size_t>(kp_idx)].x,
                     frame.keypoints[static_cast<std::size_t>(kp_idx)].y);
    sigmas.push_back(frame.keypoints[static_cast<std::size_t>(kp_idx)].scale);
    pairs.emplace_back(hit.pid, kp_idx);
  }

  result.optimization = optimizePose(predicted, points, obs, sigmas, K, options.motion);
  result.pose = result.optimization.pose;
  result.inlier_count = result.optimization.inlier_count;
  result.lost = result.optimization.lost;
  if (!result.lost) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!result.optimization.inliers[i]) continue;
      result.associations.push_back(pairs[i]);
      ++graph.point(pairs[i].first).found;
    }
  }
  return result;
}

bool needKeyframe(const KeyframeDecisionInput& input, const TrackingOptions& options) {
  const bool weak_coverage = static_cast<double>(input.inlier_count) <
                             options.keyframe_ratio * static_cast<double>(input.reference_point_count);
  const bool stale = input.frames_since_keyframe >= options.keyframe_gap;
  const bool healthy = input.inlier_count >= options.motion.min_inliers;
  return (stale || weak_coverage) && healthy && input.mapping_idle;
}

}  // namespace fslam
