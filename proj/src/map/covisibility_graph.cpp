#include "fslam/map/covisibility_graph.hpp"

#include <algorithm>
#include <set>

namespace fslam {

std::uint64_t CovisibilityGraph::addKeyFrame(KeyFrame kf) {
  kf.id = next_kf_++;
  kf.point_ids.resize(kf.keypoints.size(), -1);
  const std::uint64_t id = kf.id;
  auto [it, _] = kfs_.emplace(id, std::move(kf));
  KeyFrame& stored = it->second;
  for (std::size_t i = 0; i < stored.point_ids.size(); ++i) {
    const std::int64_t pid = stored.point_ids[i];
    if (pid < 0) continue;
    stored.point_ids[i] = -1;  // re-bind through the canonical path
    if (hasPoint(static_cast<std::uint64_t>(pid)))
      addObservation(static_cast<std::uint64_t>(pid), id, static_cast<int>(i));
  }
  return id;
}

std::uint64_t CovisibilityGraph::createPoint(const Eigen::Vector3d& position,
                                             std::uint64_t first_keyframe) {
  MapPoint p;
  p.id = next_pt_++;
  p.position = position;
  p.first_keyframe = first_keyframe;
  const std::uint64_t id = p.id;
  pts_.emplace(id, std::move(p));
  return id;
}

void CovisibilityGraph::addObservation(std::uint64_t point_id, std::uint64_t kf_id, int kp_index) {
  MapPoint& p = pts_.at(point_id);
  KeyFrame& kf = kfs_.at(kf_id);

  // Displace whatever previously occupied either side of the binding.
  const std::int64_t prev_pid = kf.point_ids.at(static_cast<std::size_t>(kp_index));
  if (prev_pid == static_cast<std::int64_t>(point_id)) return;
  if (prev_pid >= 0) removeObservation(static_cast<std::uint64_t>(prev_pid), kf_id);
  const auto prev_obs = p.observations.find(kf_id);
  if (prev_obs != p.observations.end())
    kf.point_ids[static_cast<std::size_t>(prev_obs->second)] = -1;

  p.observations[kf_id] = kp_index;
  kf.point_ids[static_cast<std::size_t>(kp_index)] = static_cast<std::int64_t>(point_id);
}

void CovisibilityGraph::removeObservation(std::uint64_t point_id, std::uint64_t kf_id) {
  auto pit = pts_.find(point_id);
  if (pit == pts_.end()) return;
  auto oit = pit->second.observations.find(kf_id);
  if (oit == pit->second.observations.end()) return;
  auto kit = kfs_.find(kf_id);
  if (kit != kfs_.end()) kit->second.point_ids[static_cast<std::size_t>(oit->second)] = -1;
  pit->second.observations.erase(oit);
  if (pit->second.observations.empty()) pts_.erase(pit);
}

void CovisibilityGraph::erasePoint(std::uint64_t point_id) {
  auto pit = pts_.find(point_id);
  if (pit == pts_.end()) return;
  for (const auto& [kf_id, idx] : pit->second.observations) {
    auto kit = kfs_.find(kf_id);
    if (kit != kfs_.end()) kit->second.point_ids[static_cast<std::size_t>(idx)] = -1;
  }
  pts_.erase(pit);
}

void CovisibilityGraph::eraseKeyFrame(std::uint64_t kf_id) {
  auto kit = kfs_.find(kf_id);
  if (kit == kfs_.end()) return;
  KeyFrame& kf = kit->second;

  for (std::size_t i = 0; i < kf.point_ids.size(); ++i) {
    const std::int64_t pid = kf.point_ids[i];
    if (pid >= 0) removeObservation(static_cast<std::uint64_t>(pid), kf_id);
  }

  for (const auto& [nb, _] : kf.edges) {
    auto nit = kfs_.find(nb);
    if (nit != kfs_.end()) nit->second.edges.erase(kf_id);
  }

  // Spanning tree: children move to the dead node's parent; when the root
  // dies its first child takes over as the new root.
  std::int64_t new_parent = kf.parent;
  std::set<std::uint64_t> children = kf.children;
  if (new_parent < 0 && !children.empty()) {
    const std::uint64_t promoted = *children.begin();
    kfs_.at(promoted).parent = -1;
    children.erase(promoted);
    new_parent = static_cast<std::int64_t>(promoted);
  }
  for (std::uint64_t child : children) {
    kfs_.at(child).parent = new_parent;
    if (new_parent >= 0) kfs_.at(static_cast<std::uint64_t>(new_parent)).children.insert(child);
  }
  if (kf.parent >= 0) kfs_.at(static_cast<std::uint64_t>(kf.parent)).children.erase(kf_id);

  kfs_.erase(kit);
}

void CovisibilityGraph::updateConnections(std::uint64_t kf_id, int min_weight) {
  KeyFrame& kf = kfs_.at(kf_id);

  std::map<std::uint64_t, int> counts;
  for (std::int64_t pid : kf.point_ids) {
    if (pid < 0) continue;
    for (const auto& [other, _] : pts_.at(static_cast<std::uint64_t>(pid)).observations)
      if (other != kf_id) ++counts[other];
  }

  std::map<std::uint64_t, int> edges;
  std::uint64_t best_id = 0;
  int best_count = 0;
  for (const auto& [other, n] : counts) {
    if (n > best_count) {
      best_count = n;
      best_id = other;
    }
    if (n >= min_weight) edges[other] = n;
  }
  if (edges.empty() && best_count > 0) edges[best_id] = best_count;

  // Detach stale symmetric entries, then install the fresh ones.
  for (const auto& [old_nb, _] : kf.edges)
    if (edges.count(old_nb) == 0) {
      auto nit = kfs_.find(old_nb);
      if (nit != kfs_.end()) nit->second.edges.erase(kf_id);
    }
  kf.edges = edges;
  for (const auto& [nb, n] : edges) kfs_.at(nb).edges[kf_id] = n;
}

void CovisibilityGraph::assignParent(std::uint64_t kf_id) {
  KeyFrame& kf = kfs_.at(kf_id);
  if (kf.parent >= 0 || kf.edges.empty()) return;
  std::uint64_t best = 0;
  int best_w = -1;
  for (const auto& [nb, w] : kf.edges)
    if (w > best_w) {
      best_w = w;
      best = nb;
    }
  // Never parent to a descendant; that would close a tree cycle.
  for (std::int64_t a = static_cast<std::int64_t>(best); a >= 0; a = kfs_.at(a).parent)
    if (static_cast<std::uint64_t>(a) == kf_id) return;
  kf.parent = static_cast<std::int64_t>(best);
  kfs_.at(best).children.insert(kf_id);
}

void CovisibilityGraph::updatePointMeta(std::uint64_t point_id) {
  MapPoint& p = pts_.at(point_id);
  if (p.observations.empty()) return;

  struct Obs {
    const KeyFrame* kf;
    int idx;
  };
  std::vector<Obs> obs;
  obs.reserve(p.observations.size());
  for (const auto& [kf_id, idx] : p.observations) obs.push_back({&kfs_.at(kf_id), idx});

  // Representative descriptor: minimal median distance to the other
  // observation descriptors (ties resolved by observation order).
  const std::size_t n = obs.size();
  std::size_t best = 0;
  double best_median = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d.push_back(obs[i].kf->descriptors.distance(static_cast<std::size_t>(obs[i].idx),
                                                  obs[j].kf->descriptors,
                                                  static_cast<std::size_t>(obs[j].idx)));
    }
    double median = 0.0;
    if (!d.empty()) {
      std::sort(d.begin(), d.end());
      median = d.size() % 2 == 1 ? d[d.size() / 2]
                                 : 0.5 * (d[d.size() / 2 - 1] + d[d.size() / 2]);
    }
    if (median < best_median) {
      best_median = median;
      best = i;
    }
  }
  const auto& src = obs[best].kf->descriptors;
  DescriptorSet rep = src.kind() == DescriptorKind::Binary ? DescriptorSet::binary(src.length())
                                                           : DescriptorSet::real(src.length());
  rep.addRowFrom(src, static_cast<std::size_t>(obs[best].idx));
  p.descriptor = std::move(rep);

  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  for (const auto& o : obs) {
    const Eigen::Vector3d dir = p.position - o.kf->pose.center();
    const double len = dir.norm();
    if (len > 1e-12) normal += dir / len;
  }
  const double len = normal.norm();
  if (len > 1e-12) p.view_normal = normal / len;
}

void CovisibilityGraph::fusePoints(std::uint64_t keep_id, std::uint64_t drop_id) {
  if (keep_id == drop_id) return;
  auto dit = pts_.find(drop_id);
  if (dit == pts_.end() || pts_.find(keep_id) == pts_.end()) return;

  const std::map<std::uint64_t, int> drop_obs = dit->second.observations;
  const int drop_found = dit->second.found;
  const int drop_visible = dit->second.visible;

  for (const auto& [kf_id, idx] : drop_obs) {
    removeObservation(drop_id, kf_id);
    MapPoint& keep = pts_.at(keep_id);
    if (keep.observations.count(kf_id) == 0) addObservation(keep_id, kf_id, idx);
  }
  MapPoint& keep = pts_.at(keep_id);
  keep.found += drop_found;
  keep.visible += drop_visible;
  updatePointMeta(keep_id);
}

std::vector<std::uint64_t> CovisibilityGraph::orderedNeighbors(std::uint64_t kf_id) const {
  const KeyFrame& kf = kfs_.at(kf_id);
  std::vector<std::pair<int, std::uint64_t>> order;
  order.reserve(kf.edges.size());
  for (const auto& [nb, w] : kf.edges) order.emplace_back(-w, nb);
  std::sort(order.begin(), order.end());
  std::vector<std::uint64_t> out;
  out.reserve(order.size());
  for (const auto& [_, nb] : order) out.push_back(nb);
  return out;
}

int CovisibilityGraph::sharedPointCount(std::uint64_t a, std::uint64_t b) const {
  const KeyFrame& ka = kfs_.at(a);
  int n = 0;
  for (std::int64_t pid : ka.point_ids) {
    if (pid < 0) continue;
    if (pts_.at(static_cast<std::uint64_t>(pid)).observations.count(b) != 0) ++n;
  }
  return n;
}

std::vector<std::uint64_t> CovisibilityGraph::keyframeIds() const {
  std::vector<std::uint64_t> ids;
  ids.reserve(kfs_.size());
  for (const auto& [id, _] : kfs_) ids.push_back(id);
  return ids;
}

std::vector<std::uint64_t> CovisibilityGraph::pointIds() const {
  std::vector<std::uint64_t> ids;
  ids.reserve(pts_.size());
  for (const auto& [id, _] : pts_) ids.push_back(id);
  return ids;
}

bool CovisibilityGraph::checkIntegrity(std::string* why) const {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };

  for (const auto& [pid, p] : pts_) {
    if (p.observations.empty()) return fail("point " + std::to_string(pid) + " has no observations");
    for (const auto& [kf_id, idx] : p.observations) {
      auto kit = kfs_.find(kf_id);
      if (kit == kfs_.end())
        return fail("point " + std::to_string(pid) + " observes dead keyframe " +
                    std::to_string(kf_id));
      const KeyFrame& kf = kit->second;
      if (idx < 0 || static_cast<std::size_t>(idx) >= kf.point_ids.size())
        return fail("point " + std::to_string(pid) + " keypoint index out of range");
      if (kf.point_ids[static_cast<std::size_t>(idx)] != static_cast<std::int64_t>(pid))
        return fail("asymmetric observation: point " + std::to_string(pid) + " vs keyframe " +
                    std::to_string(kf_id));
    }
  }

  for (const auto& [kf_id, kf] : kfs_) {
    for (std::size_t i = 0; i < kf.point_ids.size(); ++i) {
      const std::int64_t pid = kf.point_ids[i];
      if (pid < 0) continue;
      auto pit = pts_.find(static_cast<std::uint64_t>(pid));
      if (pit == pts_.end())
        return fail("keyframe " + std::to_string(kf_id) + " references dead point " +
                    std::to_string(pid));
      auto oit = pit->second.observations.find(kf_id);
      if (oit == pit->second.observations.end() || oit->second != static_cast<int>(i))
        return fail("keyframe " + std::to_string(kf_id) + " association not mirrored by point " +
                    std::to_string(pid));
    }
    for (const auto& [nb, w] : kf.edges) {
      auto nit = kfs_.find(nb);
      if (nit == kfs_.end())
        return fail("keyframe " + std::to_string(kf_id) + " edge to dead keyframe " +
                    std::to_string(nb));
      auto eit = nit->second.edges.find(kf_id);
      if (eit == nit->second.edges.end() || eit->second != w)
        return fail("asymmetric edge " + std::to_string(kf_id) + " <-> " + std::to_string(nb));
    }
    if (kf.parent >= 0) {
      auto parent = kfs_.find(static_cast<std::uint64_t>(kf.parent));
      if (parent == kfs_.end())
        return fail("keyframe " + std::to_string(kf_id) + " has dead parent");
      if (parent->second.children.count(kf_id) == 0)
        return fail("keyframe " + std::to_string(kf_id) + " missing from parent's children");
    }
    for (std::uint64_t child : kf.children) {
      auto cit = kfs_.find(child);
      if (cit == kfs_.end() || cit->second.parent != static_cast<std::int64_t>(kf_id))
        return fail("keyframe " + std::to_string(kf_id) + " child link broken");
    }
  }

  // Tree shape: parent chains terminate at a root without cycles, and the
  // tree spans all keyframes (single root) when any keyframe exists.
  int roots = 0;
  for (const auto& [kf_id, kf] : kfs_) {
    if (kf.parent < 0) ++roots;
    std::int64_t cursor = kf.parent;
    std::size_t steps = 0;
    while (cursor >= 0) {
      if (++steps > kfs_.size()) return fail("spanning-tree cycle through " + std::to_string(kf_id));
      cursor = kfs_.at(static_cast<std::uint64_t>(cursor)).parent;
    }
  }
  if (!kfs_.empty() && roots != 1)
    return fail("expected exactly one tree root, found " + std::to_string(roots));

  return true;
}

}  // namespace fslam
