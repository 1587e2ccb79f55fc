#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

#include "fslam/features/types.hpp"

namespace fslam {

/// Keypoints and descriptors of one frame.
struct FrameFeatures {
  std::uint64_t frame_id = 0;
  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;
};

class FeatureFileError : public std::runtime_error {
 public:
  enum class Kind { Io, MalformedRecord, MissingFrame, MixedDescriptorLength };
  FeatureFileError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Binary feature container, little-endian, magic "FSLF". Header: magic,
/// version u32, descriptor variant u8 (0 binary, 1 real), descriptor length
/// u32 (bits or floats), frame count u32. Per frame: frame_id u64, keypoint
/// count u32, then per keypoint x f32, y f32, octave u8, scale f32,
/// orientation f32, response f32, descriptor payload (packed bits or f32s).
class FeatureFile {
 public:
  explicit FeatureFile(const std::filesystem::path& path);

  DescriptorKind kind() const { return kind_; }
  int descriptorLength() const { return length_; }
  std::size_t frameCount() const { return offsets_.size(); }
  bool hasFrame(std::uint64_t frame_id) const { return offsets_.count(frame_id) > 0; }
  std::vector<std::uint64_t> frameIds() const;

  FrameFeatures frame(std::uint64_t frame_id) const;

 private:
  std::filesystem::path path_;
  DescriptorKind kind_ = DescriptorKind::Binary;
  int length_ = 0;
  std::map<std::uint64_t, std::pair<std::streamoff, std::uint32_t>> offsets_;  // id -> (pos, count)
};

void writeFeatureFile(const std::filesystem::path& path, const std::vector<FrameFeatures>& frames);

/// One-call form: opens the file and returns the requested frame. Real
/// descriptors are L2-normalized on ingestion (DescriptorSet invariant).
FrameFeatures loadExternalFeatures(const std::filesystem::path& path, std::uint64_t frame_id);

}  // namespace fslam
