#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace fslam {

/// Keypoint coordinates are always stored in the level-0 (full resolution)
/// pixel frame, whatever pyramid level it was detected on.
struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  int octave = 0;
  double scale = 1.0;
  double orientation = 0.0;  // radians in [-pi, pi)
  double response = 0.0;
};

enum class DescriptorKind : std::uint8_t { Binary = 0, Real = 1 };

class DescriptorError : public std::runtime_error {
 public:
  enum class Kind { MixedLength, VariantMismatch };
  DescriptorError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Fixed-variant, fixed-length descriptor container. Binary rows are packed
/// bit vectors under the Hamming metric; real rows are float vectors under
/// the Euclidean metric, L2-normalized on ingestion.
class DescriptorSet {
 public:
  DescriptorSet() = default;

  static DescriptorSet binary(int bits) {
    DescriptorSet d;
    d.kind_ = DescriptorKind::Binary;
    d.length_ = bits;
    return d;
  }
  static DescriptorSet real(int dims) {
    DescriptorSet d;
    d.kind_ = DescriptorKind::Real;
    d.length_ = dims;
    return d;
  }

  DescriptorKind kind() const { return kind_; }
  int length() const { return length_; }
  std::size_t size() const { return rows_; }
  bool empty() const { return rows_ == 0; }
  int byteStride() const { return (length_ + 7) / 8; }

  /// Appends a packed binary row of exactly byteStride() bytes.
  void addBinaryRow(std::span<const std::uint8_t> packed);
  /// Appends a real row of exactly length() floats; L2-normalizes it.
  void addRealRow(std::span<const float> values);
  /// Copies row j of another set (same variant and length) into this one.
  void addRowFrom(const DescriptorSet& other, std::size_t j);

  std::span<const std::uint8_t> binaryRow(std::size_t i) const {
    return {bin_.data() + i * byteStride(), static_cast<std::size_t>(byteStride())};
  }
  std::span<const float> realRow(std::size_t i) const {
    return {real_.data() + i * length_, static_cast<std::size_t>(length_)};
  }

  /// Metric of the variant: Hamming bit count (as double) or Euclidean norm.
  double distance(std::size_t i, const DescriptorSet& other, std::size_t j) const;

  bool compatibleWith(const DescriptorSet& other) const {
    return kind_ == other.kind_ && length_ == other.length_;
  }

 private:
  DescriptorKind kind_ = DescriptorKind::Binary;
  int length_ = 0;
  std::size_t rows_ = 0;
  std::vector<std::uint8_t> bin_;
  std::vector<float> real_;
};

double hammingDistance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
double euclideanDistance(std::span<const float> a, std::span<const float> b);

struct PyramidConfig {
  double scale_factor = 2.0;
  int n_levels = 3;

  bool isValid() const { return scale_factor > 1.0 && n_levels >= 1; }
};

/// Distance gates in the metric units of the descriptor variant. For real
/// descriptors the dimensionless values are scaled by real_scale before use
/// (L2-normalized distances live in [0, 2]).
struct MatchThresholds {
  double th_low = 50.0;
  double th_high = 100.0;
  double ratio = 0.9;
  double real_scale = 0.1;

  bool isValid() const { return th_low > 0.0 && th_low <= th_high && ratio > 0.0 && ratio <= 1.0; }

  double effectiveLow(DescriptorKind kind) const {
    return kind == DescriptorKind::Real ? th_low * real_scale : th_low;
  }
  double effectiveHigh(DescriptorKind kind) const {
    return kind == DescriptorKind::Real ? th_high * real_scale : th_high;
  }
};

}  // namespace fslam
