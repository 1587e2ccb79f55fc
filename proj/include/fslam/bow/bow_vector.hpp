#pragma once

#include <cstdint>
#include <map>

namespace fslam {

/// Sparse word id -> TF-IDF weight, L1-normalized when produced by toBow.
using BowVector = std::map<std::uint32_t, double>;

/// L1 similarity s = 1 - 0.5 * ||a_hat - b_hat||_1 over L1-normalized inputs.
/// Equivalent accumulation over shared words: s = 0.5 * sum(a + b - |a - b|).
/// Empty vectors score 0.
double bowScore(const BowVector& a, const BowVector& b);

}  // namespace fslam
