#include "fslam/io/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <yaml-cpp/yaml.h>

namespace fslam {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unitReal(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gaussian(std::mt19937_64& rng) {
  const double u1 = 1.0 - unitReal(rng);  // (0, 1]
  const double u2 = unitReal(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::Matrix3d lookOut(const Eigen::Vector3d& forward) {
  const Eigen::Vector3d up(0.0, 0.0, 1.0);
  const Eigen::Vector3d z = forward.normalized();
  const Eigen::Vector3d x = z.cross(up).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d wc;
  wc.col(0) = x;
  wc.col(1) = y;
  wc.col(2) = z;
  return wc;  // camera axes in world coordinates
}

Pose poseFromWc(const Eigen::Matrix3d& R_wc, const Eigen::Vector3d& position) {
  return Pose(R_wc.transpose(), -(R_wc.transpose() * position));
}

// Rendered-regime geometry: camera slides along +x looking down +z at a
// textured wall (z = 6) over a textured floor (y = 1, camera y points down).
constexpr double kWallZ = 6.0;
constexpr double kFloorY = 1.0;
constexpr double kRenderStep = 0.05;
constexpr double kTexCell = 0.5;

std::uint8_t cellIntensity(std::uint64_t seed, int plane, long cx, long cy) {
  std::uint64_t state = seed ^ (static_cast<std::uint64_t>(plane) << 60) ^
                        (static_cast<std::uint64_t>(cx) * 0x100000001B3ULL) ^
                        (static_cast<std::uint64_t>(cy) << 32);
  return static_cast<std::uint8_t>(30 + splitmix64(state) % 196);
}

}  // namespace

CameraIntrinsics defaultSyntheticCamera() {
  CameraIntrinsics K;
  K.fx = K.fy = 500.0;
  K.cx = 320.0;
  K.cy = 240.0;
  K.width = 640;
  K.height = 480;
  return K;
}

void appendIdDescriptor(DescriptorSet& set, std::int64_t landmark_id) {
  std::uint64_t state = static_cast<std::uint64_t>(landmark_id + 1) * kGolden;
  std::vector<std::uint8_t> bytes;
  bytes.reserve(32);
  for (int w = 0; w < 4; ++w) {
    std::uint64_t word = splitmix64(state);
    for (int b = 0; b < 8; ++b) {
      bytes.push_back(static_cast<std::uint8_t>(word & 0xFF));
      word >>= 8;
    }
  }
  set.addBinaryRow(bytes);
}

SyntheticSource::SyntheticSource(const SyntheticSceneConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed), camera_(defaultSyntheticCamera()) {
  if (!config_.isValid()) throw DatasetError(DatasetError::Kind::Malformed, "invalid scene config");

  std::mt19937_64 rng(seed_);
  landmarks_.reserve(static_cast<std::size_t>(config_.landmark_count));
  const Eigen::Vector3d span = config_.box_max - config_.box_min;
  for (int i = 0; i < config_.landmark_count; ++i) {
    Eigen::Vector3d p;
    for (int c = 0; c < 3; ++c) p(c) = config_.box_min(c) + unitReal(rng) * span(c);
    landmarks_.push_back(p);
  }

  if (config_.regime == DescriptorRegime::IdExact) {
    bases_ = DescriptorSet::binary(256);
    for (int i = 0; i < config_.landmark_count; ++i) appendIdDescriptor(bases_, i);
  } else if (config_.regime == DescriptorRegime::NoisyReal) {
    bases_ = DescriptorSet::real(config_.descriptor_dim);
    std::vector<float> row(static_cast<std::size_t>(config_.descriptor_dim));
    for (int i = 0; i < config_.landmark_count; ++i) {
      for (float& v : row) v = static_cast<float>(gaussian(rng));
      bases_.addRealRow(row);  // L2-normalized on ingestion
    }
  }

  Trajectory truth;
  for (int i = 0; i < config_.frame_count; ++i)
    truth.points.push_back(
        {static_cast<double>(i) / config_.fps, poseCw(static_cast<std::size_t>(i)).inverse(), i});
  truth_ = std::move(truth);
}

Pose SyntheticSource::poseCw(std::size_t index) const {
  if (config_.regime == DescriptorRegime::Rendered)
    return Pose(Eigen::Matrix3d::Identity(),
                Eigen::Vector3d(-kRenderStep * static_cast<double>(index), 0.0, 0.0));

  const Eigen::Vector3d m = 0.5 * (config_.box_min + config_.box_max);
  const Eigen::Vector3d h = 0.5 * (config_.box_max - config_.box_min);
  const double u = config_.frame_count > 1
                       ? static_cast<double>(index) / static_cast<double>(config_.frame_count - 1)
                       : 0.0;
  switch (config_.path) {
    case SyntheticPath::Line: {
      const double standoff = 2.2 * h.maxCoeff();
      const Eigen::Vector3d p =
          m + Eigen::Vector3d((2.0 * u - 1.0) * 0.75 * h.x(), 0.0, -(h.z() + standoff));
      return poseFromWc(Eigen::Matrix3d::Identity(), p);
    }
    case SyntheticPath::Arc: {
      const double radius = 2.2 * std::max(h.x(), h.y());
      const double theta = u * (5.0 * std::numbers::pi / 6.0);  // 150 degree sweep
      const Eigen::Vector3d p = m + radius * Eigen::Vector3d(std::cos(theta), std::sin(theta), 0.0);
      return poseFromWc(lookOut(m - p), p);
    }
    case SyntheticPath::Loop: {
      // Tangential heading: deep forward frustum, per-frame visibility limited
      // to the sector ahead; the full-circle sweep returns to the start pose.
      const double radius = 0.55 * std::min(h.x(), h.y());
      const double theta = u * (2.0 * std::numbers::pi);
      const Eigen::Vector3d out(std::cos(theta), std::sin(theta), 0.0);
      const Eigen::Vector3d tangent(-std::sin(theta), std::cos(theta), 0.0);
      return poseFromWc(lookOut(tangent), m + radius * out);
    }
  }
  return Pose();
}

SequenceFrame SyntheticSource::frame(std::size_t index) const {
  if (config_.regime == DescriptorRegime::Rendered) return renderFrame(index);

  SequenceFrame out;
  out.id = index;
  out.timestamp = static_cast<double>(index) / config_.fps;
  out.descriptors = config_.regime == DescriptorRegime::IdExact
                        ? DescriptorSet::binary(256)
                        : DescriptorSet::real(config_.descriptor_dim);

  const Pose pose = poseCw(index);
  std::uint64_t mix = seed_ + kGolden * (static_cast<std::uint64_t>(index) + 1);
  std::mt19937_64 rng(splitmix64(mix));
  std::vector<float> row(static_cast<std::size_t>(config_.descriptor_dim));
  for (std::size_t j = 0; j < landmarks_.size(); ++j) {
    const Projection proj = project(landmarks_[j], pose, camera_);
    if (!proj.ok()) continue;
    Eigen::Vector2d uv = proj.uv;
    if (config_.pixel_sigma > 0.0) {
      uv.x() += config_.pixel_sigma * gaussian(rng);
      uv.y() += config_.pixel_sigma * gaussian(rng);
    }
    if (config_.outlier_rate > 0.0 && unitReal(rng) < config_.outlier_rate) {
      uv.x() = unitReal(rng) * camera_.width;
      uv.y() = unitReal(rng) * camera_.height;
    }
    Keypoint kp;
    kp.x = uv.x();
    kp.y = uv.y();
    kp.scale = 1.0;
    kp.response = 1.0;
    out.keypoints.push_back(kp);
    out.truth_ids.push_back(static_cast<std::int64_t>(j));
    if (config_.regime == DescriptorRegime::IdExact) {
      out.descriptors.addRowFrom(bases_, j);
    } else {
      const auto base = bases_.realRow(j);
      for (std::size_t c = 0; c < row.size(); ++c)
        row[c] = base[c] + static_cast<float>(config_.descriptor_noise * gaussian(rng));
      out.descriptors.addRealRow(row);
    }
  }
  return out;
}

SequenceFrame SyntheticSource::renderFrame(std::size_t index) const {
  SequenceFrame out;
  out.id = index;
  out.timestamp = static_cast<double>(index) / config_.fps;

  const double px = kRenderStep * static_cast<double>(index);
  GrayImage img(camera_.width, camera_.height);
  for (int v = 0; v < camera_.height; ++v) {
    for (int u = 0; u < camera_.width; ++u) {
      const double dx = (u + 0.5 - camera_.cx) / camera_.fx;
      const double dy = (v + 0.5 - camera_.cy) / camera_.fy;
      const double s_wall = kWallZ;  // ray z-component is 1
      double s = s_wall;
      int plane = 0;
      if (dy > 1e-9) {
        const double s_floor = kFloorY / dy;
        if (s_floor < s) {
          s = s_floor;
          plane = 1;
        }
      }
      double tu, tv;
      if (plane == 0) {
        tu = px + dx * s;
        tv = dy * s;
      } else {
        tu = px + dx * s;
        tv = s;  // distance along the view axis over the floor
      }
      img.at(u, v) = cellIntensity(seed_, plane, static_cast<long>(std::floor(tu / kTexCell)),
                                   static_cast<long>(std::floor(tv / kTexCell)));
    }
  }
  out.image = std::move(img);
  return out;
}

SyntheticSceneConfig loadSceneConfig(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw DatasetError(DatasetError::Kind::Malformed,
                       "cannot parse " + path.string() + ": " + e.what());
  }
  SyntheticSceneConfig cfg;
  try {
    if (root["landmark_count"]) cfg.landmark_count = root["landmark_count"].as<int>();
    auto vec3 = [](const YAML::Node& n) {
      return Eigen::Vector3d(n[0].as<double>(), n[1].as<double>(), n[2].as<double>());
    };
    if (root["box_min"]) cfg.box_min = vec3(root["box_min"]);
    if (root["box_max"]) cfg.box_max = vec3(root["box_max"]);
    if (root["path"]) {
      const auto s = root["path"].as<std::string>();
      if (s == "line")
        cfg.path = SyntheticPath::Line;
      else if (s == "arc")
        cfg.path = SyntheticPath::Arc;
      else if (s == "loop")
        cfg.path = SyntheticPath::Loop;
      else
        throw DatasetError(DatasetError::Kind::Malformed, "unknown path type '" + s + "'");
    }
    if (root["frame_count"]) cfg.frame_count = root["frame_count"].as<int>();
    if (root["pixel_sigma"]) cfg.pixel_sigma = root["pixel_sigma"].as<double>();
    if (root["outlier_rate"]) cfg.outlier_rate = root["outlier_rate"].as<double>();
    if (root["descriptor_regime"]) {
      const auto s = root["descriptor_regime"].as<std::string>();
      if (s == "id-exact")
        cfg.regime = DescriptorRegime::IdExact;
      else if (s == "noisy-real")
        cfg.regime = DescriptorRegime::NoisyReal;
      else if (s == "rendered")
        cfg.regime = DescriptorRegime::Rendered;
      else
        throw DatasetError(DatasetError::Kind::Malformed, "unknown descriptor regime '" + s + "'");
    }
    if (root["descriptor_dim"]) cfg.descriptor_dim = root["descriptor_dim"].as<int>();
    if (root["descriptor_noise"]) cfg.descriptor_noise = root["descriptor_noise"].as<double>();
    if (root["fps"]) cfg.fps = root["fps"].as<double>();
  } catch (const YAML::Exception& e) {
    throw DatasetError(DatasetError::Kind::Malformed,
                       "bad value in " + path.string() + ": " + e.what());
  }
  if (!cfg.isValid())
    throw DatasetError(DatasetError::Kind::Malformed, "invalid scene config in " + path.string());
  return cfg;
}

}  // namespace fslam
