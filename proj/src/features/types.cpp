#include "fslam/features/types.hpp"

#include <bit>
#include <cmath>

namespace fslam {

void DescriptorSet::addBinaryRow(std::span<const std::uint8_t> packed) {
  if (kind_ != DescriptorKind::Binary)
    throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                          "binary row added to a real descriptor set");
  if (static_cast<int>(packed.size()) != byteStride())
    throw DescriptorError(DescriptorError::Kind::MixedLength,
                          "descriptor length differs from the set's length");
  bin_.insert(bin_.end(), packed.begin(), packed.end());
  ++rows_;
}

void DescriptorSet::addRealRow(std::span<const float> values) {
  if (kind_ != DescriptorKind::Real)
    throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                          "real row added to a binary descriptor set");
  if (static_cast<int>(values.size()) != length_)
    throw DescriptorError(DescriptorError::Kind::MixedLength,
                          "descriptor length differs from the set's length");
  double norm2 = 0.0;
  for (float v : values) norm2 += static_cast<double>(v) * v;
  const float inv = norm2 > 0.0 ? static_cast<float>(1.0 / std::sqrt(norm2)) : 1.0f;
  for (float v : values) real_.push_back(v * inv);
  ++rows_;
}

void DescriptorSet::addRowFrom(const DescriptorSet& other, std::size_t j) {
  if (!compatibleWith(other))
    throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                          "row copied between incompatible descriptor sets");
  if (kind_ == DescriptorKind::Binary) {
    addBinaryRow(other.binaryRow(j));
  } else {
    // Rows are already normalized; append directly.
    auto row = other.realRow(j);
    real_.insert(real_.end(), row.begin(), row.end());
    ++rows_;
  }
}

double hammingDistance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  int bits = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    bits += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  return static_cast<double>(bits);
}

double euclideanDistance(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double DescriptorSet::distance(std::size_t i, const DescriptorSet& other, std::size_t j) const {
  if (!compatibleWith(other))
    throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                          "distance between incompatible descriptor sets");
  if (kind_ == DescriptorKind::Binary) return hammingDistance(binaryRow(i), other.binaryRow(j));
  return euclideanDistance(realRow(i), other.realRow(j));
}

}  // namespace fslam
