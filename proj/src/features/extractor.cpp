#include "fslam/features/extractor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "fslam/features/pyramid.hpp"

namespace fslam {

namespace {

constexpr int kDescriptorBits = 256;
constexpr int kPatchRadius = 13;   // descriptor pattern radius before rotation
constexpr int kCentroidRadius = 7; // orientation patch
constexpr int kBorder = 20;        // keeps rotated pattern and circle inside the level

// The 16-pixel Bresenham circle of radius 3, in ring order.
constexpr std::array<std::pair<int, int>, 16> kRing = {{{0, -3},
                                                        {1, -3},
                                                        {2, -2},
                                                        {3, -1},
                                                        {3, 0},
                                                        {3, 1},
                                                        {2, 2},
                                                        {1, 3},
                                                        {0, 3},
                                                        {-1, 3},
                                                        {-2, 2},
                                                        {-3, 1},
                                                        {-3, 0},
                                                        {-3, -1},
                                                        {-2, -2},
                                                        {-1, -3}}};

struct PatternPair {
  int x1, y1, x2, y2;
};

// Fixed comparison pattern, generated once from the seeded RNG.
std::vector<PatternPair> makePattern(std::uint64_t seed) {
  std::vector<PatternPair> pattern;
  pattern.reserve(kDescriptorBits);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, kPatchRadius / 2.0);
  auto draw = [&]() {
    while (true) {
      const int v = static_cast<int>(std::lround(gauss(rng)));
      if (std::abs(v) <= kPatchRadius) return v;
    }
  };
  for (int i = 0; i < kDescriptorBits; ++i) {
    PatternPair p{draw(), draw(), draw(), draw()};
    pattern.push_back(p);
  }
  return pattern;
}

// Contrast score of the ring test; 0 when the pixel is not a corner.
// Requires >= 9 contiguous ring pixels brighter or darker than center by th.
double ringScore(const GrayImage& img, int x, int y, int th) {
  const int c = img.at(x, y);
  std::array<int, 16> state{};
  for (int i = 0; i < 16; ++i) {
    const int v = img.at(x + kRing[i].first, y + kRing[i].second);
    if (v >= c + th)
      state[i] = 1;
    else if (v <= c - th)
      state[i] = -1;
  }
  for (int polarity : {1, -1}) {
    int run = 0, best = 0;
    for (int i = 0; i < 32; ++i) {
      if (state[i % 16] == polarity) {
        if (++run > best) best = run;
        if (best >= 16) break;
      } else {
        run = 0;
      }
    }
    if (best >= 9) {
      double score = 0.0;
      for (int i = 0; i < 16; ++i) {
        if (state[i] != polarity) continue;
        const int v = img.at(x + kRing[i].first, y + kRing[i].second);
        score += std::abs(v - c) - th;
      }
      return score;
    }
  }
  return 0.0;
}

double intensityCentroidAngle(const GrayImage& img, int x, int y) {
  double m10 = 0.0, m01 = 0.0;
  for (int dy = -kCentroidRadius; dy <= kCentroidRadius; ++dy) {
    for (int dx = -kCentroidRadius; dx <= kCentroidRadius; ++dx) {
      if (dx * dx + dy * dy > kCentroidRadius * kCentroidRadius) continue;
      const int v = img.at(x + dx, y + dy);
      m10 += dx * v;
      m01 += dy * v;
    }
  }
  return std::atan2(m01, m10);
}

GrayImage boxBlur5(const GrayImage& in) {
  GrayImage out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      int sum = 0, n = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        const int yy = std::clamp(y + dy, 0, in.height - 1);
        for (int dx = -2; dx <= 2; ++dx) {
          const int xx = std::clamp(x + dx, 0, in.width - 1);
          sum += in.at(xx, yy);
          ++n;
        }
      }
      out.at(x, y) = static_cast<std::uint8_t>(sum / n);
    }
  }
  return out;
}

struct Detection {
  Keypoint kp;
  int level_x, level_y;  // integer location on its own level
};

}  // namespace

ExtractedFeatures detectAndDescribe(const GrayImage& image, const PyramidConfig& cfg,
                                    int target_count, const ExtractorOptions& opts) {
  ExtractedFeatures out;
  out.descriptors = DescriptorSet::binary(kDescriptorBits);
  if (image.empty() || target_count <= 0) return out;

  static const std::vector<PatternPair> kPattern = makePattern(ExtractorOptions{}.pattern_seed);
  const std::vector<PatternPair>& pattern =
      opts.pattern_seed == ExtractorOptions{}.pattern_seed ? kPattern : makePattern(opts.pattern_seed);

  const auto pyramid = buildPyramid(image, cfg);

  std::vector<Detection> detections;
  std::vector<GrayImage> blurred;
  blurred.reserve(pyramid.size());

  for (int level = 0; level < static_cast<int>(pyramid.size()); ++level) {
    const GrayImage& img = pyramid[level];
    blurred.push_back(boxBlur5(img));
    if (img.width <= 2 * kBorder || img.height <= 2 * kBorder) continue;

    // Score map for the ring test, then 3x3 non-max suppression.
    std::vector<double> scores(static_cast<std::size_t>(img.width) * img.height, 0.0);
    for (int y = kBorder; y < img.height - kBorder; ++y)
      for (int x = kBorder; x < img.width - kBorder; ++x)
        scores[static_cast<std::size_t>(y) * img.width + x] =
            ringScore(img, x, y, opts.contrast_threshold);

    const double level_scale = std::pow(cfg.scale_factor, level);
    auto score_at = [&](int x, int y) { return scores[static_cast<std::size_t>(y) * img.width + x]; };
    for (int y = kBorder; y < img.height - kBorder; ++y) {
      for (int x = kBorder; x < img.width - kBorder; ++x) {
        const double s = score_at(x, y);
        if (s <= 0.0) continue;
        // Strict over earlier neighbors, >= over later ones: one winner per plateau.
        if (s <= score_at(x - 1, y - 1) || s <= score_at(x, y - 1) || s <= score_at(x + 1, y - 1) ||
            s <= score_at(x - 1, y))
          continue;
        if (s < score_at(x + 1, y) || s < score_at(x - 1, y + 1) || s < score_at(x, y + 1) ||
            s < score_at(x + 1, y + 1))
          continue;
        Detection d;
        d.level_x = x;
        d.level_y = y;
        d.kp.x = levelToFull(x, level_scale);
        d.kp.y = levelToFull(y, level_scale);
        d.kp.octave = level;
        d.kp.scale = level_scale;
        d.kp.response = s;
        d.kp.orientation = intensityCentroidAngle(blurred[level], x, y);
        detections.push_back(d);
      }
    }
  }

  // Spread by per-cell quota over a grid in the level-0 frame.
  const int cells = std::max(1, opts.grid_cells);
  const double cell_w = static_cast<double>(image.width) / cells;
  const double cell_h = static_cast<double>(image.height) / cells;
  const int quota = std::max(1, (target_count + cells * cells - 1) / (cells * cells));

  auto stronger = [](const Detection& a, const Detection& b) {
    if (a.kp.response != b.kp.response) return a.kp.response > b.kp.response;
    if (a.kp.octave != b.kp.octave) return a.kp.octave < b.kp.octave;
    if (a.kp.y != b.kp.y) return a.kp.y < b.kp.y;
    return a.kp.x < b.kp.x;
  };

  std::vector<std::vector<Detection>> buckets(static_cast<std::size_t>(cells) * cells);
  for (const auto& d : detections) {
    const int cx = std::min(cells - 1, static_cast<int>(d.kp.x / cell_w));
    const int cy = std::min(cells - 1, static_cast<int>(d.kp.y / cell_h));
    buckets[static_cast<std::size_t>(cy) * cells + cx].push_back(d);
  }
  std::vector<Detection> kept;
  for (auto& bucket : buckets) {
    std::sort(bucket.begin(), bucket.end(), stronger);
    const int take = std::min<std::size_t>(quota, bucket.size());
    kept.insert(kept.end(), bucket.begin(), bucket.begin() + take);
  }
  std::sort(kept.begin(), kept.end(), stronger);
  if (static_cast<int>(kept.size()) > target_count) kept.resize(target_count);

  // Descriptors: pairwise comparisons of the blurred level, pattern rotated
  // by the keypoint orientation.
  for (const auto& d : kept) {
    const GrayImage& img = blurred[d.kp.octave];
    const double ca = std::cos(d.kp.orientation);
    const double sa = std::sin(d.kp.orientation);
    std::array<std::uint8_t, kDescriptorBits / 8> bits{};
    for (int i = 0; i < kDescriptorBits; ++i) {
      const PatternPair& p = pattern[i];
      const int x1 = d.level_x + static_cast<int>(std::lround(ca * p.x1 - sa * p.y1));
      const int y1 = d.level_y + static_cast<int>(std::lround(sa * p.x1 + ca * p.y1));
      const int x2 = d.level_x + static_cast<int>(std::lround(ca * p.x2 - sa * p.y2));
      const int y2 = d.level_y + static_cast<int>(std::lround(sa * p.x2 + ca * p.y2));
      const int v1 = img.inside(x1, y1) ? img.at(x1, y1) : 0;
      const int v2 = img.inside(x2, y2) ? img.at(x2, y2) : 0;
      if (v1 < v2) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    }
    out.keypoints.push_back(d.kp);
    out.descriptors.addBinaryRow(bits);
  }
  return out;
}

}  // namespace fslam
