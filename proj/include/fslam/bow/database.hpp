#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "fslam/bow/bow_vector.hpp"

namespace fslam {

/// Inverted-index keyframe database for place queries. Scores accumulate per
/// shared word, reproducing the L1 similarity of bowScore for normalized
/// vectors.
class KeyframeDatabase {
 public:
  void add(std::uint64_t kf_id, const BowVector& bow);
  void remove(std::uint64_t kf_id);
  bool contains(std::uint64_t kf_id) const { return bows_.count(kf_id) != 0; }
  std::size_t size() const { return bows_.size(); }

  struct Result {
    std::uint64_t id = 0;
    double score = 0.0;
  };

  /// Keyframes sharing at least one word with the query, scoring >=
  /// min_score, excluding the given set; ordered by descending score then
  /// ascending id, truncated to max_results (0 = unlimited).
  std::vector<Result> query(const BowVector& bow, const std::set<std::uint64_t>& exclude,
                            double min_score, std::size_t max_results = 0) const;

 private:
  std::map<std::uint32_t, std::set<std::uint64_t>> inverted_;
  std::map<std::uint64_t, BowVector> bows_;
};

}  // namespace fslam
