#include "fslam/bow/database.hpp"

#include <algorithm>

namespace fslam {

void KeyframeDatabase::add(std::uint64_t kf_id, const BowVector& bow) {
  remove(kf_id);
  bows_[kf_id] = bow;
  for (const auto& [word, _] : bow) inverted_[word].insert(kf_id);
}

void KeyframeDatabase::remove(std::uint64_t kf_id) {
  auto it = bows_.find(kf_id);
  if (it == bows_.end()) return;
  for (const auto& [word, _] : it->second) {
    auto wit = inverted_.find(word);
    if (wit == inverted_.end()) continue;
    wit->second.erase(kf_id);
    if (wit->second.empty()) inverted_.erase(wit);
  }
  bows_.erase(it);
}

std::vector<KeyframeDatabase::Result> KeyframeDatabase::query(const BowVector& bow,
                                                              const std::set<std::uint64_t>& exclude,
                                                              double min_score,
                                                              std::size_t max_results) const {
  // Candidates share at least one word with the query.
  std::set<std::uint64_t> candidates;
  for (const auto& [word, _] : bow) {
    auto wit = inverted_.find(word);
    if (wit == inverted_.end()) continue;
    for (std::uint64_t id : wit->second)
      if (exclude.count(id) == 0) candidates.insert(id);
  }

  std::vector<Result> results;
  for (std::uint64_t id : candidates) {
    const double s = bowScore(bow, bows_.at(id));
    if (s >= min_score) results.push_back({id, s});
  }
  std::sort(results.begin(), results.end(), [](const Result& a, const Result& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  if (max_results > 0 && results.size() > max_results) results.resize(max_results);
  return results;
}

}  // namespace fslam
