#include "fslam/bow/bow_vector.hpp"

#include <algorithm>
#include <cmath>

namespace fslam {

double bowScore(const BowVector& a, const BowVector& b) {
  double sum_a = 0.0, sum_b = 0.0;
  for (const auto& [_, w] : a) sum_a += std::abs(w);
  for (const auto& [_, w] : b) sum_b += std::abs(w);
  if (sum_a <= 0.0 || sum_b <= 0.0) return 0.0;

  // s = sum over shared words of min(a_hat, b_hat) = 1 - 0.5*||a_hat - b_hat||_1.
  double s = 0.0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      s += std::min(ia->second / sum_a, ib->second / sum_b);
      ++ia;
      ++ib;
    }
  }
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace fslam
