#include "fslam/features/feature_file.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "fslam/util/binary_io.hpp"

namespace fslam {

namespace {

constexpr char kMagic[4] = {'F', 'S', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

std::size_t descriptorBytes(DescriptorKind kind, int length) {
  return kind == DescriptorKind::Binary ? static_cast<std::size_t>((length + 7) / 8)
                                        : static_cast<std::size_t>(length) * 4;
}

[[noreturn]] void malformed(const std::string& what) {
  throw FeatureFileError(FeatureFileError::Kind::MalformedRecord, what);
}

}  // namespace

FeatureFile::FeatureFile(const std::filesystem::path& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FeatureFileError(FeatureFileError::Kind::Io, "cannot open " + path.string());

  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    malformed("bad magic in " + path.string());

  std::uint32_t version = 0, length = 0, frame_count = 0;
  std::uint8_t variant = 0;
  if (!readLE(in, version) || version != kVersion) malformed("unsupported version");
  if (!readLE(in, variant) || variant > 1) malformed("unknown descriptor variant");
  if (!readLE(in, length) || length == 0) malformed("zero descriptor length");
  if (!readLE(in, frame_count)) malformed("truncated header");
  kind_ = static_cast<DescriptorKind>(variant);
  length_ = static_cast<int>(length);

  const std::size_t record =
      4u + 4u + 1u + 4u + 4u + 4u + descriptorBytes(kind_, length_);  // x y octave scale ori resp
  for (std::uint32_t f = 0; f < frame_count; ++f) {
    std::uint64_t frame_id = 0;
    std::uint32_t kp_count = 0;
    if (!readLE(in, frame_id) || !readLE(in, kp_count)) malformed("truncated frame header");
    const std::streamoff pos = in.tellg();
    offsets_[frame_id] = {pos, kp_count};
    in.seekg(static_cast<std::streamoff>(record) * kp_count, std::ios::cur);
    if (!in) malformed("truncated frame payload");
  }
  // Anything past the declared frames is corruption.
  in.peek();
  if (!in.eof()) malformed("trailing bytes after declared frames");
}

std::vector<std::uint64_t> FeatureFile::frameIds() const {
  std::vector<std::uint64_t> ids;
  ids.reserve(offsets_.size());
  for (const auto& [id, _] : offsets_) ids.push_back(id);
  return ids;
}

FrameFeatures FeatureFile::frame(std::uint64_t frame_id) const {
  const auto it = offsets_.find(frame_id);
  if (it == offsets_.end())
    throw FeatureFileError(FeatureFileError::Kind::MissingFrame,
                           "frame " + std::to_string(frame_id) + " not in " + path_.string());

  std::ifstream in(path_, std::ios::binary);
  if (!in) throw FeatureFileError(FeatureFileError::Kind::Io, "cannot open " + path_.string());
  in.seekg(it->second.first);

  FrameFeatures out;
  out.frame_id = frame_id;
  out.descriptors =
      kind_ == DescriptorKind::Binary ? DescriptorSet::binary(length_) : DescriptorSet::real(length_);

  const std::uint32_t count = it->second.second;
  std::vector<std::uint8_t> bin(descriptorBytes(DescriptorKind::Binary, length_));
  std::vector<float> real(static_cast<std::size_t>(length_));
  for (std::uint32_t i = 0; i < count; ++i) {
    float x, y, scale, orientation, response;
    std::uint8_t octave;
    if (!readLE(in, x) || !readLE(in, y) || !readLE(in, octave) || !readLE(in, scale) ||
        !readLE(in, orientation) || !readLE(in, response))
      malformed("truncated keypoint record");
    if (!std::isfinite(x) || !std::isfinite(y)) malformed("non-finite keypoint coordinates");
    Keypoint kp;
    kp.x = x;
    kp.y = y;
    kp.octave = octave;
    kp.scale = scale;
    kp.orientation = orientation;
    kp.response = response;
    out.keypoints.push_back(kp);

    if (kind_ == DescriptorKind::Binary) {
      in.read(reinterpret_cast<char*>(bin.data()), static_cast<std::streamsize>(bin.size()));
      if (in.gcount() != static_cast<std::streamsize>(bin.size()))
        malformed("truncated descriptor payload");
      out.descriptors.addBinaryRow(bin);
    } else {
      for (auto& v : real)
        if (!readLE(in, v)) malformed("truncated descriptor payload");
      out.descriptors.addRealRow(real);
    }
  }
  return out;
}

void writeFeatureFile(const std::filesystem::path& path, const std::vector<FrameFeatures>& frames) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FeatureFileError(FeatureFileError::Kind::Io, "cannot open " + path.string());

  DescriptorKind kind = frames.empty() ? DescriptorKind::Binary : frames.front().descriptors.kind();
  int length = frames.empty() ? 1 : frames.front().descriptors.length();

  out.write(kMagic, 4);
  writeLE(out, kVersion);
  writeLE(out, static_cast<std::uint8_t>(kind));
  writeLE(out, static_cast<std::uint32_t>(length));
  writeLE(out, static_cast<std::uint32_t>(frames.size()));

  for (const auto& f : frames) {
    if (f.descriptors.kind() != kind)
      throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                            "frames mix descriptor variants");
    if (f.descriptors.length() != length)
      throw DescriptorError(DescriptorError::Kind::MixedLength, "frames mix descriptor lengths");
    if (f.keypoints.size() != f.descriptors.size())
      throw FeatureFileError(FeatureFileError::Kind::MalformedRecord,
                             "keypoint/descriptor count mismatch");
    writeLE(out, f.frame_id);
    writeLE(out, static_cast<std::uint32_t>(f.keypoints.size()));
    for (std::size_t i = 0; i < f.keypoints.size(); ++i) {
      const Keypoint& kp = f.keypoints[i];
      writeLE(out, static_cast<float>(kp.x));
      writeLE(out, static_cast<float>(kp.y));
      writeLE(out, static_cast<std::uint8_t>(kp.octave));
      writeLE(out, static_cast<float>(kp.scale));
      writeLE(out, static_cast<float>(kp.orientation));
      writeLE(out, static_cast<float>(kp.response));
      if (kind == DescriptorKind::Binary) {
        const auto row = f.descriptors.binaryRow(i);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
      } else {
        for (float v : f.descriptors.realRow(i)) writeLE(out, v);
      }
    }
  }
  if (!out) throw FeatureFileError(FeatureFileError::Kind::Io, "write failed: " + path.string());
}

FrameFeatures loadExternalFeatures(const std::filesystem::path& path, std::uint64_t frame_id) {
  return FeatureFile(path).frame(frame_id);
}

}  // namespace fslam
