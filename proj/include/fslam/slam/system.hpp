#pragma once

#include <cstdint>
#include <future>
#include <optional>
#include <vector>

#include "fslam/bow/database.hpp"
#include "fslam/bow/vocabulary.hpp"
#include "fslam/core/trajectory.hpp"
#include "fslam/map/covisibility_graph.hpp"
#include "fslam/slam/loop_closing.hpp"
#include "fslam/slam/mapping.hpp"
#include "fslam/slam/tracking.hpp"

namespace fslam {

struct SystemOptions {
  CameraIntrinsics K;
  TrackingOptions tracking;
  MappingOptions mapping;
  LoopOptions loop;
  bool enable_loop_closing = true;
  bool enable_relocalization = true;
  std::uint64_t seed = 1;
};

struct SystemStats {
  int frames = 0;
  int tracked_frames = 0;  // frames that ended with an accepted pose
  int keyframes = 0;
  int points_created = 0;
  int loops = 0;
  int relocalizations = 0;

  double coverage() const { return frames > 0 ? double(tracked_frames) / frames : 0.0; }
};

/// Full pipeline: two-view bootstrap, per-frame tracking with constant
/// velocity prediction, keyframe insertion + point creation + local BA +
/// culling, loop detection on a background task joined at the next frame
/// boundary (the only mutating steps run exclusively between frames), and
/// relocalization after tracking loss.
class SlamSystem {
 public:
  explicit SlamSystem(const SystemOptions& options);
  ~SlamSystem();

  /// Installs the vocabulary enabling BoW registration, loop closing and
  /// relocalization. Without one the system still tracks and maps.
  void setVocabulary(Vocabulary vocab) { vocab_ = std::move(vocab); }

  TrackingStatus process(const Frame& frame);

  TrackingStatus status() const { return status_; }
  const CovisibilityGraph& graph() const { return graph_; }
  const KeyframeDatabase& database() const { return db_; }
  const SystemStats& stats() const { return stats_; }
  const std::optional<LoopCorrectionStats>& lastLoop() const { return last_loop_; }

  /// Camera-to-world poses of every tracked frame, each reconstructed
  /// through its reference keyframe so later corrections (local BA, loop
  /// closure) propagate into the emitted trajectory.
  Trajectory trajectory() const;

 private:
  struct FrameRecord {
    long frame_id = -1;
    double timestamp = 0.0;
    std::int64_t ref_kf = -1;  // anchor keyframe; -1 = use `absolute`
    Pose rel;                  // T_frame <- T_anchor at record time
    Pose absolute;             // world->camera fallback
  };

  void joinLoopTask();
  void applyLoop(const LoopCandidate& candidate);
  void recordFrame(const Frame& frame, std::uint64_t ref_kf, const Pose& pose);
  void promoteKeyframe(const Frame& frame, const TrackResult& track);
  void reanchorAfterCull(const std::map<std::uint64_t, std::pair<Pose, std::int64_t>>& snapshot);

  SystemOptions options_;
  CovisibilityGraph graph_;
  Vocabulary vocab_;
  KeyframeDatabase db_;
  LoopDetector detector_;
  SystemStats stats_;
  std::optional<LoopCorrectionStats> last_loop_;

  TrackingStatus status_ = TrackingStatus::NotInitialized;
  std::optional<Frame> pending_init_;
  int init_gap_ = 0;
  std::uint64_t reference_kf_ = 0;
  int frames_since_kf_ = 0;

  Pose prev_pose_;               // last tracked frame, world->camera
  std::int64_t prev_ref_ = -1;   // its anchor keyframe
  Pose prev_rel_;                // prev_pose_ relative to the anchor
  VelocityModel velocity_;

  std::vector<FrameRecord> records_;
  std::future<std::optional<LoopCandidate>> loop_task_;
};

}  // namespace fslam
