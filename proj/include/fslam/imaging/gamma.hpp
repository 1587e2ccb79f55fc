#pragma once

#include <filesystem>
#include <stdexcept>

#include "fslam/imaging/image.hpp"

namespace fslam {

/// Exponent of the gamma power transformation I' = I^gamma on unit-interval
/// intensities. gamma < 1 emulates overexposure, gamma > 1 underexposure.
class GammaParam {
 public:
  explicit GammaParam(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  }
  double value() const { return gamma_; }

 private:
  double gamma_;
};

/// Per pixel: out = round(255 * (p/255)^gamma), half away from zero.
GrayImage gammaTransform(const GrayImage& img, const GammaParam& g);

/// Single-intensity version of the transform.
std::uint8_t gammaTransformPixel(std::uint8_t p, const GammaParam& g);

/// Transforms every recognized image (*.png, *.pgm) in input_dir and writes
/// it under the identical filename in output_dir. Returns the count written.
int distortSequence(const std::filesystem::path& input_dir,
                    const std::filesystem::path& output_dir, const GammaParam& g);

}  // namespace fslam
