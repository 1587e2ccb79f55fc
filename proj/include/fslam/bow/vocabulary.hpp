#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "fslam/bow/bow_vector.hpp"
#include "fslam/features/types.hpp"

namespace fslam {

class VocabularyError : public std::runtime_error {
 public:
  enum class Kind { CorpusTooSmall, InvalidConfig, Io, Malformed };
  VocabularyError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct VocabNode {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  std::uint32_t parent = kNone;  // kNone on the root
  std::vector<std::uint32_t> children;
  std::vector<std::uint8_t> bin;  // packed centroid, binary variant
  std::vector<float> real;        // centroid, real variant
  bool leaf = false;
  std::uint32_t word = kNone;
  double idf = 0.0;
};

/// Hierarchical k-means vocabulary tree. Binary centroids are medoids under
/// the Hamming metric (always actual corpus descriptors); real centroids are
/// Euclidean means. Word IDF weights come from training-corpus frequencies
/// with each descriptor counted as one document: idf = ln(1 + N/n_word).
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Recursive k-means to depth L with k-means++ seeding; deterministic per
  /// seed. Throws CorpusTooSmall when corpus.size() < k, InvalidConfig on
  /// k < 2 or L < 1.
  static Vocabulary train(const DescriptorSet& corpus, int k, int L, std::uint64_t seed);

  DescriptorKind kind() const { return kind_; }
  int descriptorLength() const { return length_; }
  int branching() const { return k_; }
  int levels() const { return levels_; }
  std::uint32_t wordCount() const { return static_cast<std::uint32_t>(leaf_node_.size()); }
  const std::vector<VocabNode>& nodes() const { return nodes_; }
  bool empty() const { return nodes_.empty(); }

  /// Greedy root-to-leaf descent (nearest child, ties to the lowest index).
  std::uint32_t wordOf(const DescriptorSet& set, std::size_t row) const;
  double wordIdf(std::uint32_t word) const { return nodes_[leaf_node_[word]].idf; }
  std::uint32_t wordNode(std::uint32_t word) const { return leaf_node_[word]; }

  /// TF-IDF bag of words, L1-normalized. Empty input gives an empty vector.
  /// Throws DescriptorError on variant mismatch.
  BowVector toBow(const DescriptorSet& descriptors) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  double nodeDistance(std::uint32_t node, const DescriptorSet& set, std::size_t row) const;
  void rebuildDerived();

  DescriptorKind kind_ = DescriptorKind::Binary;
  int length_ = 0;
  int k_ = 0;
  int levels_ = 0;
  std::vector<VocabNode> nodes_;
  std::vector<std::uint32_t> leaf_node_;  // word id -> node index
};

}  // namespace fslam
