#include "fslam/slam/system.hpp"

#include <algorithm>
#include <limits>

namespace fslam {

SlamSystem::SlamSystem(const SystemOptions& options)
    : options_(options), detector_(options.loop) {}

SlamSystem::~SlamSystem() {
  if (loop_task_.valid()) loop_task_.wait();
}

void SlamSystem::recordFrame(const Frame& frame, std::uint64_t ref_kf, const Pose& pose) {
  FrameRecord rec;
  rec.frame_id = static_cast<long>(frame.id);
  rec.timestamp = frame.timestamp;
  rec.ref_kf = static_cast<std::int64_t>(ref_kf);
  rec.rel = compose(pose, graph_.keyframe(ref_kf).pose.inverse());
  rec.absolute = pose;
  records_.push_back(rec);
  ++stats_.tracked_frames;
}

TrackingStatus SlamSystem::process(const Frame& frame) {
  ++stats_.frames;
  joinLoopTask();

  if (status_ == TrackingStatus::NotInitialized) {
    if (!pending_init_) {
      pending_init_ = frame;
      init_gap_ = 0;
      return status_;
    }
    const InitResult init =
        initializeMap(*pending_init_, frame, options_.K, graph_, options_.tracking, options_.seed);
    if (!init.ok()) {
      // Matched but under-triangulated pairs lack parallax; hold the reference
      // so the baseline keeps growing. Swap it when matching itself failed or
      // the reference has gone stale.
      ++init_gap_;
      if (init.status != InitStatus::InsufficientPoints || init_gap_ > options_.tracking.init_max_gap) {
        pending_init_ = frame;
        init_gap_ = 0;
      }
      return status_;
    }
    insertKeyframe(graph_, init.kf1, vocab_, db_, options_.mapping);
    insertKeyframe(graph_, init.kf2, vocab_, db_, options_.mapping);
    stats_.keyframes += 2;
    stats_.points_created += init.created_points;
    recordFrame(*pending_init_, init.kf1, init.pose1);
    recordFrame(frame, init.kf2, init.pose2);
    pending_init_.reset();

    reference_kf_ = init.kf2;
    frames_since_kf_ = 0;
    prev_pose_ = init.pose2;
    prev_ref_ = static_cast<std::int64_t>(init.kf2);
    prev_rel_ = Pose();
    velocity_.last_relative = compose(init.pose2, init.pose1.inverse());
    velocity_.valid = true;
    status_ = TrackingStatus::Tracking;
    return status_;
  }

  if (status_ == TrackingStatus::Lost) {
    if (!options_.enable_relocalization || vocab_.empty()) return status_;
    const std::optional<Pose> recovered =
        relocalize(frame, vocab_, db_, graph_, options_.K, options_.loop);
    if (!recovered) return status_;
    // Resume against the keyframe closest to the recovered viewpoint.
    const Eigen::Vector3d center = recovered->inverse().t;
    std::uint64_t best = graph_.keyframes().begin()->first;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto& [id, kf] : graph_.keyframes()) {
      const double d2 = (kf.pose.inverse().t - center).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = id;
      }
    }
    reference_kf_ = best;
    recordFrame(frame, reference_kf_, *recovered);
    prev_pose_ = *recovered;
    prev_ref_ = static_cast<std::int64_t>(reference_kf_);
    prev_rel_ = compose(prev_pose_, graph_.keyframe(reference_kf_).pose.inverse());
    velocity_.valid = false;
    status_ = TrackingStatus::Tracking;
    ++stats_.relocalizations;
    return status_;
  }

  // Tracking.
  const Pose predicted = velocity_.valid ? compose(velocity_.last_relative, prev_pose_) : prev_pose_;
  const TrackResult track =
      trackFrame(frame, predicted, graph_, reference_kf_, options_.K, options_.tracking);
  ++frames_since_kf_;
  if (track.lost) {
    status_ = TrackingStatus::Lost;
    velocity_.valid = false;
    return status_;
  }

  velocity_.last_relative = compose(track.pose, prev_pose_.inverse());
  velocity_.valid = true;

  KeyframeDecisionInput decision;
  decision.frames_since_keyframe = frames_since_kf_;
  decision.inlier_count = track.inlier_count;
  decision.reference_point_count = graph_.keyframe(reference_kf_).associatedPointCount();
  decision.mapping_idle = true;  // mapping is synchronous; loop work was joined above
  if (needKeyframe(decision, options_.tracking)) {
    promoteKeyframe(frame, track);
  } else {
    recordFrame(frame, reference_kf_, track.pose);
  }

  prev_pose_ = records_.back().ref_kf >= 0
                   ? compose(records_.back().rel,
                             graph_.keyframe(static_cast<std::uint64_t>(records_.back().ref_kf)).pose)
                   : records_.back().absolute;
  prev_ref_ = records_.back().ref_kf;
  prev_rel_ = records_.back().rel;
  return status_;
}

void SlamSystem::promoteKeyframe(const Frame& frame, const TrackResult& track) {
  KeyFrame kf;
  kf.frame_id = frame.id;
  kf.timestamp = frame.timestamp;
  kf.pose = track.pose;
  kf.keypoints = frame.keypoints;
  kf.descriptors = frame.descriptors;
  kf.truth_ids = frame.truth_ids;
  kf.point_ids.assign(frame.keypoints.size(), -1);
  for (const auto& [pid, kp_idx] : track.associations)
    kf.point_ids[static_cast<std::size_t>(kp_idx)] = static_cast<std::int64_t>(pid);
  const std::uint64_t id = graph_.addKeyFrame(std::move(kf));
  for (const auto& [pid, kp_idx] : track.associations)
    if (graph_.hasPoint(pid)) graph_.updatePointMeta(pid);
  ++stats_.keyframes;

  insertKeyframe(graph_, id, vocab_, db_, options_.mapping);
  stats_.points_created += createMapPoints(graph_, id, options_.K, options_.mapping);
  localBundleAdjustment(graph_, id, options_.K, options_.mapping);

  std::map<std::uint64_t, std::pair<Pose, std::int64_t>> snapshot;
  for (const auto& [kid, k] : graph_.keyframes()) snapshot[kid] = {k.pose, k.parent};
  const CullStats culled = cull(graph_, options_.mapping, {}, &db_);
  if (culled.keyframes_removed > 0) reanchorAfterCull(snapshot);

  reference_kf_ = id;
  frames_since_kf_ = 0;
  recordFrame(frame, id, graph_.keyframe(id).pose);

  if (options_.enable_loop_closing && !vocab_.empty() && !loop_task_.valid()) {
    loop_task_ = std::async(std::launch::async,
                            [this, id]() { return detector_.detect(graph_, db_, id); });
  }
}

void SlamSystem::reanchorAfterCull(
    const std::map<std::uint64_t, std::pair<Pose, std::int64_t>>& snapshot) {
  auto reanchor = [&](std::int64_t& ref, Pose& rel, Pose& absolute) {
    if (ref < 0 || graph_.hasKeyFrame(static_cast<std::uint64_t>(ref))) return;
    const auto it = snapshot.find(static_cast<std::uint64_t>(ref));
    if (it == snapshot.end()) {
      ref = -1;
      return;
    }
    absolute = compose(rel, it->second.first);
    std::int64_t cur = it->second.second;
    while (cur >= 0 && !graph_.hasKeyFrame(static_cast<std::uint64_t>(cur))) {
      const auto up = snapshot.find(static_cast<std::uint64_t>(cur));
      if (up == snapshot.end()) break;
      cur = up->second.second;
    }
    if (cur >= 0 && graph_.hasKeyFrame(static_cast<std::uint64_t>(cur))) {
      ref = cur;
      rel = compose(absolute, graph_.keyframe(static_cast<std::uint64_t>(cur)).pose.inverse());
    } else {
      ref = -1;
    }
  };
  for (FrameRecord& rec : records_) reanchor(rec.ref_kf, rec.rel, rec.absolute);
  Pose prev_abs = prev_pose_;
  reanchor(prev_ref_, prev_rel_, prev_abs);
  prev_pose_ = prev_ref_ >= 0
                   ? compose(prev_rel_, graph_.keyframe(static_cast<std::uint64_t>(prev_ref_)).pose)
                   : prev_abs;
}

void SlamSystem::joinLoopTask() {
  if (!loop_task_.valid()) return;
  const std::optional<LoopCandidate> candidate = loop_task_.get();
  if (candidate) applyLoop(*candidate);
}

void SlamSystem::applyLoop(const LoopCandidate& candidate) {
  if (!graph_.hasKeyFrame(candidate.query) || !graph_.hasKeyFrame(candidate.match)) return;
  const std::optional<LoopTransform> transform =
      computeLoopTransform(graph_, candidate, options_.K, options_.loop);
  if (!transform) return;
  last_loop_ = correctLoop(graph_, candidate, *transform, options_.loop);
  ++stats_.loops;
  detector_.reset();
  // Poses moved wholesale: rebase the tracker's short-term state.
  if (prev_ref_ >= 0 && graph_.hasKeyFrame(static_cast<std::uint64_t>(prev_ref_)))
    prev_pose_ = compose(prev_rel_, graph_.keyframe(static_cast<std::uint64_t>(prev_ref_)).pose);
  velocity_.valid = false;
}

Trajectory SlamSystem::trajectory() const {
  Trajectory traj;
  traj.points.reserve(records_.size());
  for (const FrameRecord& rec : records_) {
    Pose cw = rec.absolute;
    if (rec.ref_kf >= 0 && graph_.hasKeyFrame(static_cast<std::uint64_t>(rec.ref_kf)))
      cw = compose(rec.rel, graph_.keyframe(static_cast<std::uint64_t>(rec.ref_kf)).pose);
    traj.points.push_back({rec.timestamp, cw.inverse(), rec.frame_id});
  }
  return traj;
}

}  // namespace fslam
