#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fslam/features/types.hpp"
#include "fslam/imaging/image.hpp"

namespace fslam {

struct ExtractorOptions {
  int contrast_threshold = 20;  // intensity margin for the circle test
  int grid_cells = 8;           // keypoints distributed over grid_cells x grid_cells
  std::uint64_t pattern_seed = 0x9e3779b97f4a7c15ull;
};

struct ExtractedFeatures {
  std::vector<Keypoint> keypoints;
  DescriptorSet descriptors;  // 256-bit binary
};

/// Built-in classical baseline: a contrast test on a 16-pixel circle per
/// pyramid level with non-max suppression, orientation from the intensity
/// centroid, and a 256-bit pairwise-intensity-comparison descriptor sampled
/// from a fixed seeded pattern. Keypoints are spread by per-cell quota over
/// the image grid; at most target_count are returned, strongest first.
/// Deterministic: identical inputs produce bit-identical output.
ExtractedFeatures detectAndDescribe(const GrayImage& image, const PyramidConfig& cfg,
                                    int target_count, const ExtractorOptions& opts = {});

}  // namespace fslam
