#include "fslam/slam/loop_closing.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "fslam/core/alignment.hpp"
#include "fslam/features/matcher.hpp"
#include "fslam/optim/motion_only.hpp"
#include "fslam/optim/pnp.hpp"

namespace fslam {

namespace {

std::set<std::uint64_t> covisibilityGroup(const CovisibilityGraph& graph, std::uint64_t kf_id) {
  std::set<std::uint64_t> group{kf_id};
  for (const auto& [nb, _] : graph.keyframe(kf_id).edges) group.insert(nb);
  return group;
}

/// Associated map points of a keyframe with their observation descriptors.
struct AssociatedPoints {
  std::vector<std::uint64_t> pids;
  std::vector<int> kp_indices;
  DescriptorSet descriptors;
};

AssociatedPoints associatedPoints(const CovisibilityGraph& graph, std::uint64_t kf_id) {
  const KeyFrame& kf = graph.keyframe(kf_id);
  AssociatedPoints out;
  out.descriptors = kf.descriptors.kind() == DescriptorKind::Binary
                        ? DescriptorSet::binary(kf.descriptors.length())
                        : DescriptorSet::real(kf.descriptors.length());
  for (std::size_t i = 0; i < kf.point_ids.size(); ++i) {
    if (kf.point_ids[i] < 0) continue;
    out.pids.push_back(static_cast<std::uint64_t>(kf.point_ids[i]));
    out.kp_indices.push_back(static_cast<int>(i));
    out.descriptors.addRowFrom(kf.descriptors, i);
  }
  return out;
}

bool projectsWithin(const SimTransform& S, const Eigen::Vector3d& x_src,
                    const CameraIntrinsics& K, const Eigen::Vector2d& uv, double sigma,
                    double chi2) {
  const Eigen::Vector3d y = S * x_src;
  if (y.z() <= 1e-9) return false;
  const Eigen::Vector2d proj(K.fx * y.x() / y.z() + K.cx, K.fy * y.y() / y.z() + K.cy);
  return (proj - uv).squaredNorm() <= chi2 * sigma * sigma;
}

}  // namespace

std::optional<LoopCandidate> LoopDetector::detect(const CovisibilityGraph& graph,
                                                  const KeyframeDatabase& db, std::uint64_t kf_id) {
  if (db.size() < static_cast<std::size_t>(options_.min_database_size)) return std::nullopt;
  if (!graph.hasKeyFrame(kf_id)) return std::nullopt;
  const KeyFrame& kf = graph.keyframe(kf_id);
  if (kf.bow.empty() || kf.edges.empty()) return std::nullopt;

  // Baseline: worst similarity inside the query's own neighborhood.
  double s_min = std::numeric_limits<double>::infinity();
  for (const auto& [nb, _] : kf.edges)
    s_min = std::min(s_min, bowScore(kf.bow, graph.keyframe(nb).bow));

  std::set<std::uint64_t> exclude = covisibilityGroup(graph, kf_id);
  const auto hits = db.query(kf.bow, exclude, s_min);
  if (hits.empty()) {
    prev_groups_.clear();
    return std::nullopt;
  }

  std::optional<LoopCandidate> confirmed;
  std::vector<ConsistentGroup> new_groups;
  for (const auto& hit : hits) {
    if (!graph.hasKeyFrame(hit.id)) continue;
    ConsistentGroup g;
    g.members = covisibilityGroup(graph, hit.id);
    for (const ConsistentGroup& prev : prev_groups_) {
      const bool overlaps = std::any_of(g.members.begin(), g.members.end(), [&](std::uint64_t m) {
        return prev.members.count(m) != 0;
      });
      if (overlaps) g.count = std::max(g.count, prev.count + 1);
    }
    if (!confirmed && g.count >= options_.consistency_required)
      confirmed = LoopCandidate{kf_id, hit.id, hit.score, g.count};
    new_groups.push_back(std::move(g));
  }
  prev_groups_ = std::move(new_groups);
  return confirmed;
}

std::optional<LoopTransform> computeLoopTransform(const CovisibilityGraph& graph,
                                                  const LoopCandidate& candidate,
                                                  const CameraIntrinsics& K,
                                                  const LoopOptions& options) {
  const KeyFrame& cur = graph.keyframe(candidate.query);
  const KeyFrame& old = graph.keyframe(candidate.match);
  const AssociatedPoints ac = associatedPoints(graph, candidate.query);
  const AssociatedPoints am = associatedPoints(graph, candidate.match);
  if (ac.pids.empty() || am.pids.empty()) return std::nullopt;

  const std::vector<Match> matches =
      matchDescriptors(ac.descriptors, am.descriptors, options.thresholds, MatchMode::Relaxed);
  if (static_cast<int>(matches.size()) < 3) return std::nullopt;

  struct Pair {
    Eigen::Vector3d xc, xm;      // camera-frame positions
    Eigen::Vector2d uvc, uvm;    // observed pixels
    double sc, sm;               // sigma levels
    std::uint64_t pid_c, pid_m;  // map point ids
  };
  std::vector<Pair> pairs;
  pairs.reserve(matches.size());
  for (const Match& m : matches) {
    const std::uint64_t pc = ac.pids[static_cast<std::size_t>(m.a)];
    const std::uint64_t pm = am.pids[static_cast<std::size_t>(m.b)];
    const Keypoint& kc = cur.keypoints[static_cast<std::size_t>(ac.kp_indices[static_cast<std::size_t>(m.a)])];
    const Keypoint& km = old.keypoints[static_cast<std::size_t>(am.kp_indices[static_cast<std::size_t>(m.b)])];
    pairs.push_back({cur.pose * graph.point(pc).position, old.pose * graph.point(pm).position,
                     {kc.x, kc.y}, {km.x, km.y}, kc.scale, km.scale, pc, pm});
  }

  auto countInliers = [&](const SimTransform& S, std::vector<char>& mask) {
    const SimTransform Sinv = S.inverse();
    int count = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Pair& p = pairs[i];
      const bool good = projectsWithin(S, p.xm, K, p.uvc, p.sc, options.ransac_chi2) &&
                        projectsWithin(Sinv, p.xc, K, p.uvm, p.sm, options.ransac_chi2);
      mask[i] = good ? 1 : 0;
      count += good ? 1 : 0;
    }
    return count;
  };

  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  SimTransform best;
  int best_count = 0;
  std::vector<char> best_mask(pairs.size(), 0), mask(pairs.size(), 0);
  std::vector<Eigen::Vector3d> from(3), to(3);
  for (int it = 0; it < options.ransac_iterations; ++it) {
    for (std::size_t i = 0; i < 3; ++i) {
      const std::size_t j = i + rng() % (order.size() - i);
      std::swap(order[i], order[j]);
      from[i] = pairs[order[i]].xm;
      to[i] = pairs[order[i]].xc;
    }
    const AlignmentResult fit = umeyamaAlignPoints(from, to, !options.fix_scale);
    if (!fit.ok()) continue;
    const int count = countInliers(fit.transform, mask);
    if (count > best_count) {
      best_count = count;
      best = fit.transform;
      best_mask = mask;
    }
  }
  if (best_count < options.min_inliers) return std::nullopt;

  // Refit on the consensus set.
  std::vector<Eigen::Vector3d> all_from, all_to;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (best_mask[i]) {
      all_from.push_back(pairs[i].xm);
      all_to.push_back(pairs[i].xc);
    }
  const AlignmentResult refit = umeyamaAlignPoints(all_from, all_to, !options.fix_scale);
  if (refit.ok()) {
    const int count = countInliers(refit.transform, mask);
    if (count >= best_count) {
      best_count = count;
      best = refit.transform;
      best_mask = mask;
    }
  }

  LoopTransform out;
  out.similarity = best;
  out.inlier_count = best_count;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (best_mask[i]) out.inlier_pairs.emplace_back(pairs[i].pid_c, pairs[i].pid_m);
  return out;
}

LoopCorrectionStats correctLoop(CovisibilityGraph& graph, const LoopCandidate& candidate,
                                const LoopTransform& transform, const LoopOptions& options) {
  LoopCorrectionStats stats;
  const std::uint64_t cur_id = candidate.query;
  const std::uint64_t old_id = candidate.match;

  // Drifted poses at entry, as scale-1 similarities.
  std::map<std::uint64_t, SimTransform> pre;
  for (const auto& [id, kf] : graph.keyframes()) pre[id] = SimTransform::fromPose(kf.pose);

  {
    Sim3PoseGraphProblem probe;
    probe.nodes = pre;
    const Sim3Edge loop_edge{old_id, cur_id, transform.similarity, 1.0};
    stats.loop_residual_before = sim3EdgeResidualNorm2(probe, loop_edge);
  }

  // Propagate the corrected similarity through the query's neighborhood.
  const SimTransform S_cur_corr = compose(transform.similarity, pre.at(old_id));
  const std::set<std::uint64_t> group = covisibilityGroup(graph, cur_id);
  std::map<std::uint64_t, SimTransform> corrected;
  for (std::uint64_t g : group) {
    const SimTransform rel = compose(pre.at(g), pre.at(cur_id).inverse());
    corrected[g] = compose(rel, S_cur_corr);
    graph.keyframe(g).pose = corrected[g].toPose();
  }
  stats.corrected_keyframes = static_cast<int>(group.size());

  // Move the group's map points with their (smallest-id) observing member.
  std::set<std::uint64_t> group_points;
  for (std::uint64_t g : group)
    for (std::int64_t pid : graph.keyframe(g).point_ids)
      if (pid >= 0) group_points.insert(static_cast<std::uint64_t>(pid));
  for (std::uint64_t pid : group_points) {
    MapPoint& p = graph.point(pid);
    std::uint64_t ref = 0;
    bool found = false;
    for (const auto& [obs_kf, _] : p.observations)
      if (group.count(obs_kf) != 0) {
        ref = obs_kf;
        found = true;
        break;
      }
    if (!found) continue;
    p.position = corrected.at(ref).inverse() * (pre.at(ref) * p.position);
  }

  // Fuse duplicates: first the similarity inliers (pairs known to be the
  // same landmark), then a proximity sweep between the two neighborhoods.
  const std::set<std::uint64_t> loop_side = covisibilityGroup(graph, old_id);
  for (const auto& [pid_c, pid_m] : transform.inlier_pairs) {
    if (pid_c == pid_m || !graph.hasPoint(pid_c) || !graph.hasPoint(pid_m)) continue;
    graph.fusePoints(pid_m, pid_c);
    ++stats.fused_points;
  }
  std::set<std::uint64_t> loop_points;
  for (std::uint64_t k : loop_side)
    for (std::int64_t pid : graph.keyframe(k).point_ids)
      if (pid >= 0) loop_points.insert(static_cast<std::uint64_t>(pid));
  const double fuse_gate =
      options.thresholds.effectiveHigh(graph.keyframe(cur_id).descriptors.kind());
  for (std::uint64_t pm : loop_points) {
    if (!graph.hasPoint(pm)) continue;
    for (std::uint64_t pc : group_points) {
      if (pc == pm || !graph.hasPoint(pc) || !graph.hasPoint(pm)) continue;
      const MapPoint& a = graph.point(pm);
      const MapPoint& b = graph.point(pc);
      if ((a.position - b.position).norm() >= options.fuse_radius) continue;
      if (a.descriptor.empty() || b.descriptor.empty()) continue;
      if (a.descriptor.distance(0, b.descriptor, 0) > fuse_gate) continue;
      graph.fusePoints(pm, pc);
      ++stats.fused_points;
    }
  }

  // Connectivity changed around both neighborhoods.
  for (std::uint64_t k : group)
    if (graph.hasKeyFrame(k)) graph.updateConnections(k, options.covis_min_weight);
  for (std::uint64_t k : loop_side)
    if (graph.hasKeyFrame(k)) graph.updateConnections(k, options.covis_min_weight);

  graph.keyframe(cur_id).loop_keyframe = true;
  graph.keyframe(old_id).loop_keyframe = true;
  graph.keyframe(cur_id).loop_edges.insert(old_id);
  graph.keyframe(old_id).loop_edges.insert(cur_id);

  // Essential-graph pose optimization: spanning tree + strong covisibility
  // edges + loop edges, measurements from the drifted relative poses except
  // the loop edge itself.
  Sim3PoseGraphProblem problem;
  for (const auto& [id, _] : graph.keyframes())
    problem.nodes[id] = corrected.count(id) != 0 ? corrected.at(id) : pre.at(id);
  problem.fixed.insert(old_id);

  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  auto addEdge = [&](std::uint64_t from, std::uint64_t to, const SimTransform& meas) {
    const auto key = std::minmax(from, to);
    if (!seen.insert(key).second) return;
    problem.edges.push_back({from, to, meas, 1.0});
  };
  addEdge(old_id, cur_id, transform.similarity);
  for (const auto& [id, kf] : graph.keyframes()) {
    if (kf.parent >= 0) {
      const auto parent = static_cast<std::uint64_t>(kf.parent);
      addEdge(parent, id, compose(pre.at(id), pre.at(parent).inverse()));
    }
    for (std::uint64_t nb : kf.loop_edges)
      if (graph.hasKeyFrame(nb)) addEdge(id, nb, compose(pre.at(nb), pre.at(id).inverse()));
    for (const auto& [nb, w] : kf.edges)
      if (w >= options.essential_min_weight)
        addEdge(id, nb, compose(pre.at(nb), pre.at(id).inverse()));
  }

  const std::map<std::uint64_t, SimTransform> before_pg = problem.nodes;
  stats.pose_graph = solveSim3PoseGraph(problem, options.pose_graph);

  for (const auto& [id, node] : problem.nodes) graph.keyframe(id).pose = node.toPose();
  for (std::uint64_t pid : graph.pointIds()) {
    MapPoint& p = graph.point(pid);
    const std::uint64_t ref = p.observations.begin()->first;
    p.position = problem.nodes.at(ref).inverse() * (before_pg.at(ref) * p.position);
  }
  for (std::uint64_t pid : graph.pointIds()) graph.updatePointMeta(pid);

  {
    Sim3PoseGraphProblem probe;
    probe.nodes = problem.nodes;
    const Sim3Edge loop_edge{old_id, cur_id, transform.similarity, 1.0};
    stats.loop_residual_after = sim3EdgeResidualNorm2(probe, loop_edge);
  }
  return stats;
}

std::optional<Pose> relocalize(const Frame& frame, const Vocabulary& vocab,
                               const KeyframeDatabase& db, CovisibilityGraph& graph,
                               const CameraIntrinsics& K, const LoopOptions& options) {
  if (vocab.empty() || frame.descriptors.empty()) return std::nullopt;
  const BowVector bow = vocab.toBow(frame.descriptors);
  const auto hits =
      db.query(bow, {}, 0.0, static_cast<std::size_t>(options.reloc_max_candidates));

  for (const auto& hit : hits) {
    if (!graph.hasKeyFrame(hit.id)) continue;
    const AssociatedPoints assoc = associatedPoints(graph, hit.id);
    if (assoc.pids.size() < 6) continue;

    const std::vector<Match> matches =
        matchDescriptors(frame.descriptors, assoc.descriptors, options.thresholds, MatchMode::Relaxed);
    if (matches.size() < 6) continue;

    std::vector<Eigen::Vector3d> points;
    std::vector<Eigen::Vector2d> pixels;
    std::vector<double> sigmas;
    points.reserve(matches.size());
    for (const Match& m : matches) {
      points.push_back(graph.point(assoc.pids[static_cast<std::size_t>(m.b)]).position);
      const Keypoint& kp = frame.keypoints[static_cast<std::size_t>(m.a)];
      pixels.emplace_back(kp.x, kp.y);
      sigmas.push_back(kp.scale);
    }

    PnpOptions pnp;
    pnp.seed = options.seed;
    const PnpResult coarse = solvePnpRansac(points, pixels, sigmas, K, pnp);
    if (!coarse.ok) continue;

    MotionOnlyOptions refine;
    refine.min_inliers = options.reloc_min_inliers;
    const MotionOnlyResult refined = optimizePose(coarse.pose, points, pixels, sigmas, K, refine);
    if (!refined.lost) return refined.pose;
  }
  return std::nullopt;
}

}  // namespace fslam
