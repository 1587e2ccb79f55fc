#include "fslam/map/map_io.hpp"

#include <fstream>

#include "fslam/util/binary_io.hpp"

namespace fslam {

/// Private-field access for snapshot restore (ids must survive verbatim,
/// which the public mutation API deliberately does not allow).
struct MapSnapshotAccess {
  static std::map<std::uint64_t, KeyFrame>& keyframes(CovisibilityGraph& g) { return g.kfs_; }
  static std::map<std::uint64_t, MapPoint>& points(CovisibilityGraph& g) { return g.pts_; }
  static void setNextIds(CovisibilityGraph& g, std::uint64_t kf, std::uint64_t pt) {
    g.next_kf_ = kf;
    g.next_pt_ = pt;
  }
};

namespace {

constexpr char kMagic[4] = {'F', 'S', 'L', 'M'};
constexpr std::uint32_t kVersion = 1;

[[noreturn]] void malformed(const std::string& what) {
  throw MapIoError(MapIoError::Kind::Malformed, what);
}

void writeDescriptorRow(std::ostream& out, const DescriptorSet& set, std::size_t row) {
  if (set.kind() == DescriptorKind::Binary) {
    const auto bytes = set.binaryRow(row);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  } else {
    for (float v : set.realRow(row)) writeLE(out, v);
  }
}

void readDescriptorRow(std::istream& in, DescriptorSet& set) {
  if (set.kind() == DescriptorKind::Binary) {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(set.byteStride()));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) malformed("truncated binary descriptor row");
    set.addBinaryRow(bytes);
  } else {
    std::vector<float> values(static_cast<std::size_t>(set.length()));
    for (float& v : values)
      if (!readLE(in, v)) malformed("truncated real descriptor row");
    set.addRealRow(values);
  }
}

void writePose(std::ostream& out, const Pose& pose) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) writeLE(out, pose.R(r, c));
  for (int i = 0; i < 3; ++i) writeLE(out, pose.t(i));
}

Pose readPose(std::istream& in) {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (!readLE(in, R(r, c))) malformed("truncated pose");
  for (int i = 0; i < 3; ++i)
    if (!readLE(in, t(i))) malformed("truncated pose");
  return Pose(R, t);
}

void writeVec3(std::ostream& out, const Eigen::Vector3d& v) {
  for (int i = 0; i < 3; ++i) writeLE(out, v(i));
}

Eigen::Vector3d readVec3(std::istream& in) {
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i)
    if (!readLE(in, v(i))) malformed("truncated vector");
  return v;
}

}  // namespace

void saveMapSnapshot(const CovisibilityGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MapIoError(MapIoError::Kind::Io, "cannot write " + path.string());

  // One descriptor variant per map; default when the map holds none.
  DescriptorKind kind = DescriptorKind::Binary;
  int length = 0;
  for (const auto& [_, kf] : graph.keyframes())
    if (!kf.descriptors.empty() || kf.descriptors.length() > 0) {
      kind = kf.descriptors.kind();
      length = kf.descriptors.length();
      break;
    }

  out.write(kMagic, 4);
  writeLE(out, kVersion);
  writeLE(out, static_cast<std::uint8_t>(kind));
  writeLE(out, static_cast<std::uint32_t>(length));
  std::uint64_t next_kf = 0, next_pt = 0;
  for (const auto& [id, _] : graph.keyframes()) next_kf = std::max(next_kf, id + 1);
  for (const auto& [id, _] : graph.points()) next_pt = std::max(next_pt, id + 1);
  writeLE(out, next_kf);
  writeLE(out, next_pt);
  writeLE(out, static_cast<std::uint32_t>(graph.keyframeCount()));
  writeLE(out, static_cast<std::uint32_t>(graph.pointCount()));

  for (const auto& [id, kf] : graph.keyframes()) {
    writeLE(out, id);
    writeLE(out, kf.frame_id);
    writeLE(out, kf.timestamp);
    writePose(out, kf.pose);
    writeLE(out, kf.parent);
    writeLE(out, static_cast<std::uint8_t>(kf.loop_keyframe ? 1 : 0));

    writeLE(out, static_cast<std::uint32_t>(kf.keypoints.size()));
    const bool has_truth = !kf.truth_ids.empty();
    writeLE(out, static_cast<std::uint8_t>(has_truth ? 1 : 0));
    for (std::size_t i = 0; i < kf.keypoints.size(); ++i) {
      const Keypoint& kp = kf.keypoints[i];
      writeLE(out, kp.x);
      writeLE(out, kp.y);
      writeLE(out, static_cast<std::int32_t>(kp.octave));
      writeLE(out, kp.scale);
      writeLE(out, kp.orientation);
      writeLE(out, kp.response);
      writeLE(out, kf.point_ids[i]);
      if (has_truth) writeLE(out, kf.truth_ids[i]);
      writeDescriptorRow(out, kf.descriptors, i);
    }

    writeLE(out, static_cast<std::uint32_t>(kf.bow.size()));
    for (const auto& [word, weight] : kf.bow) {
      writeLE(out, word);
      writeLE(out, weight);
    }
    writeLE(out, static_cast<std::uint32_t>(kf.edges.size()));
    for (const auto& [nb, w] : kf.edges) {
      writeLE(out, nb);
      writeLE(out, static_cast<std::int32_t>(w));
    }
    writeLE(out, static_cast<std::uint32_t>(kf.loop_edges.size()));
    for (std::uint64_t nb : kf.loop_edges) writeLE(out, nb);
  }

  for (const auto& [id, p] : graph.points()) {
    writeLE(out, id);
    writeVec3(out, p.position);
    writeVec3(out, p.view_normal);
    writeLE(out, p.first_keyframe);
    writeLE(out, static_cast<std::int32_t>(p.visible));
    writeLE(out, static_cast<std::int32_t>(p.found));
    writeLE(out, p.truth_id);
    writeLE(out, static_cast<std::uint32_t>(p.observations.size()));
    for (const auto& [kf_id, kp_idx] : p.observations) {
      writeLE(out, kf_id);
      writeLE(out, static_cast<std::int32_t>(kp_idx));
    }
    writeLE(out, static_cast<std::uint8_t>(p.descriptor.empty() ? 0 : 1));
    if (!p.descriptor.empty()) writeDescriptorRow(out, p.descriptor, 0);
  }
  if (!out) throw MapIoError(MapIoError::Kind::Io, "write failed for " + path.string());
}

CovisibilityGraph loadMapSnapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapIoError(MapIoError::Kind::Io, "cannot open " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    malformed("bad magic in " + path.string());
  std::uint32_t version = 0, length = 0, kf_count = 0, pt_count = 0;
  std::uint8_t variant = 0;
  std::uint64_t next_kf = 0, next_pt = 0;
  if (!readLE(in, version) || version != kVersion) malformed("unsupported version");
  if (!readLE(in, variant) || variant > 1) malformed("unknown descriptor variant");
  if (!readLE(in, length)) malformed("truncated header");
  if (!readLE(in, next_kf) || !readLE(in, next_pt)) malformed("truncated header");
  if (!readLE(in, kf_count) || !readLE(in, pt_count)) malformed("truncated header");
  const auto kind = static_cast<DescriptorKind>(variant);

  CovisibilityGraph graph;
  auto& kfs = MapSnapshotAccess::keyframes(graph);
  auto& pts = MapSnapshotAccess::points(graph);
  MapSnapshotAccess::setNextIds(graph, next_kf, next_pt);

  for (std::uint32_t k = 0; k < kf_count; ++k) {
    KeyFrame kf;
    if (!readLE(in, kf.id) || !readLE(in, kf.frame_id) || !readLE(in, kf.timestamp))
      malformed("truncated keyframe header");
    kf.pose = readPose(in);
    std::uint8_t loop_flag = 0;
    if (!readLE(in, kf.parent) || !readLE(in, loop_flag)) malformed("truncated keyframe header");
    kf.loop_keyframe = loop_flag != 0;

    std::uint32_t kp_count = 0;
    std::uint8_t has_truth = 0;
    if (!readLE(in, kp_count) || !readLE(in, has_truth)) malformed("truncated keypoint header");
    kf.descriptors = kind == DescriptorKind::Binary
                         ? DescriptorSet::binary(static_cast<int>(length))
                         : DescriptorSet::real(static_cast<int>(length));
    kf.keypoints.resize(kp_count);
    kf.point_ids.resize(kp_count, -1);
    if (has_truth) kf.truth_ids.resize(kp_count, -1);
    for (std::uint32_t i = 0; i < kp_count; ++i) {
      Keypoint& kp = kf.keypoints[i];
      std::int32_t octave = 0;
      if (!readLE(in, kp.x) || !readLE(in, kp.y) || !readLE(in, octave) || !readLE(in, kp.scale) ||
          !readLE(in, kp.orientation) || !readLE(in, kp.response) || !readLE(in, kf.point_ids[i]))
        malformed("truncated keypoint");
      kp.octave = octave;
      if (has_truth && !readLE(in, kf.truth_ids[i])) malformed("truncated keypoint");
      readDescriptorRow(in, kf.descriptors);
    }

    std::uint32_t bow_count = 0;
    if (!readLE(in, bow_count)) malformed("truncated bow");
    for (std::uint32_t i = 0; i < bow_count; ++i) {
      std::uint32_t word = 0;
      double weight = 0.0;
      if (!readLE(in, word) || !readLE(in, weight)) malformed("truncated bow entry");
      kf.bow[word] = weight;
    }
    std::uint32_t edge_count = 0;
    if (!readLE(in, edge_count)) malformed("truncated edges");
    for (std::uint32_t i = 0; i < edge_count; ++i) {
      std::uint64_t nb = 0;
      std::int32_t w = 0;
      if (!readLE(in, nb) || !readLE(in, w)) malformed("truncated edge");
      kf.edges[nb] = w;
    }
    std::uint32_t loop_count = 0;
    if (!readLE(in, loop_count)) malformed("truncated loop edges");
    for (std::uint32_t i = 0; i < loop_count; ++i) {
      std::uint64_t nb = 0;
      if (!readLE(in, nb)) malformed("truncated loop edge");
      kf.loop_edges.insert(nb);
    }
    const std::uint64_t id = kf.id;
    if (!kfs.emplace(id, std::move(kf)).second) malformed("duplicate keyframe id");
  }

  for (std::uint32_t k = 0; k < pt_count; ++k) {
    MapPoint p;
    if (!readLE(in, p.id)) malformed("truncated point");
    p.position = readVec3(in);
    p.view_normal = readVec3(in);
    std::int32_t visible = 0, found = 0;
    if (!readLE(in, p.first_keyframe) || !readLE(in, visible) || !readLE(in, found) ||
        !readLE(in, p.truth_id))
      malformed("truncated point");
    p.visible = visible;
    p.found = found;
    std::uint32_t obs_count = 0;
    if (!readLE(in, obs_count)) malformed("truncated observations");
    for (std::uint32_t i = 0; i < obs_count; ++i) {
      std::uint64_t kf_id = 0;
      std::int32_t kp_idx = 0;
      if (!readLE(in, kf_id) || !readLE(in, kp_idx)) malformed("truncated observation");
      p.observations[kf_id] = kp_idx;
    }
    std::uint8_t has_desc = 0;
    if (!readLE(in, has_desc)) malformed("truncated point descriptor flag");
    p.descriptor = kind == DescriptorKind::Binary ? DescriptorSet::binary(static_cast<int>(length))
                                                  : DescriptorSet::real(static_cast<int>(length));
    if (has_desc) readDescriptorRow(in, p.descriptor);
    const std::uint64_t id = p.id;
    if (!pts.emplace(id, std::move(p)).second) malformed("duplicate point id");
  }

  in.peek();
  if (!in.eof()) malformed("trailing bytes after declared records");

  // children are derived, not stored
  for (auto& [id, kf] : kfs)
    if (kf.parent >= 0) {
      const auto parent = static_cast<std::uint64_t>(kf.parent);
      if (kfs.count(parent) == 0) malformed("keyframe parent not in snapshot");
      kfs.at(parent).children.insert(id);
    }

  std::string why;
  if (!graph.checkIntegrity(&why)) malformed("inconsistent snapshot: " + why);
  return graph;
}

}  // namespace fslam
