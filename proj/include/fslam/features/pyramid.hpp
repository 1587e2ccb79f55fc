#pragma once

#include <stdexcept>
#include <vector>

#include "fslam/features/types.hpp"
#include "fslam/imaging/image.hpp"

namespace fslam {

class PyramidError : public std::runtime_error {
 public:
  explicit PyramidError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Scale pyramid by area-average downsampling. Level i has dimensions
/// floor(dim / scale_factor^i); level 0 is the input image. Throws
/// PyramidError when a level would reach zero pixels (config too deep).
std::vector<GrayImage> buildPyramid(const GrayImage& image, const PyramidConfig& cfg);

/// Level-i pixel coordinate expressed in the level-0 frame (center aligned).
inline double levelToFull(double coord, double level_scale) {
  return (coord + 0.5) * level_scale - 0.5;
}

}  // namespace fslam
