#include "fslam/features/matcher.hpp"

#include <limits>

namespace fslam {

namespace {

struct Nearest {
  int best = -1;
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
};

std::vector<Nearest> nearestTwo(const DescriptorSet& from, const DescriptorSet& to) {
  std::vector<Nearest> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) {
    Nearest& n = out[i];
    for (std::size_t j = 0; j < to.size(); ++j) {
      const double d = from.distance(i, to, j);
      if (d < n.d1) {
        n.d2 = n.d1;
        n.d1 = d;
        n.best = static_cast<int>(j);
      } else if (d < n.d2) {
        n.d2 = d;
      }
    }
  }
  return out;
}

bool accept(const Nearest& n, double gate, double ratio) {
  if (n.best < 0 || n.d1 > gate) return false;
  return !(n.d2 < std::numeric_limits<double>::infinity()) || n.d1 < ratio * n.d2;
}

}  // namespace

std::vector<Match> matchDescriptors(const DescriptorSet& a, const DescriptorSet& b,
                                    const MatchThresholds& th, MatchMode mode) {
  if (!a.compatibleWith(b))
    throw DescriptorError(DescriptorError::Kind::VariantMismatch,
                          "matching descriptor sets of different variant or length");

  std::vector<Match> matches;
  if (a.empty() || b.empty()) return matches;

  const double gate =
      mode == MatchMode::Strict ? th.effectiveLow(a.kind()) : th.effectiveHigh(a.kind());

  const auto ab = nearestTwo(a, b);
  const auto ba = nearestTwo(b, a);

  for (std::size_t i = 0; i < a.size(); ++i) {
    const Nearest& n = ab[i];
    if (!accept(n, gate, th.ratio)) continue;
    const Nearest& back = ba[n.best];
    if (back.best != static_cast<int>(i)) continue;
    if (!accept(back, gate, th.ratio)) continue;
    matches.push_back({static_cast<int>(i), n.best, n.d1});
  }
  return matches;
}

}  // namespace fslam
