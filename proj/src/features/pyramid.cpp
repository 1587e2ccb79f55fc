#include "fslam/features/pyramid.hpp"

#include <algorithm>
#include <cmath>

namespace fslam {

namespace {

// Area average over the input rectangle [x*s, (x+1)*s) x [y*s, (y+1)*s),
// with fractional edge coverage, clamped to the image.
GrayImage areaDownsample(const GrayImage& in, int out_w, int out_h, double s) {
  GrayImage out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    const double y0 = oy * s;
    const double y1 = std::min((oy + 1) * s, static_cast<double>(in.height));
    for (int ox = 0; ox < out_w; ++ox) {
      const double x0 = ox * s;
      const double x1 = std::min((ox + 1) * s, static_cast<double>(in.width));
      double sum = 0.0, weight = 0.0;
      for (int iy = static_cast<int>(y0); iy < static_cast<int>(std::ceil(y1)); ++iy) {
        const double wy = std::min<double>(iy + 1, y1) - std::max<double>(iy, y0);
        if (wy <= 0.0) continue;
        for (int ix = static_cast<int>(x0); ix < static_cast<int>(std::ceil(x1)); ++ix) {
          const double wx = std::min<double>(ix + 1, x1) - std::max<double>(ix, x0);
          if (wx <= 0.0) continue;
          sum += wx * wy * in.at(ix, iy);
          weight += wx * wy;
        }
      }
      out.at(ox, oy) = static_cast<std::uint8_t>(
          std::clamp<long>(std::lround(weight > 0.0 ? sum / weight : 0.0), 0, 255));
    }
  }
  return out;
}

}  // namespace

std::vector<GrayImage> buildPyramid(const GrayImage& image, const PyramidConfig& cfg) {
  if (image.empty()) throw PyramidError("empty input image");
  if (!cfg.isValid()) throw PyramidError("invalid pyramid config");

  std::vector<GrayImage> levels;
  levels.reserve(cfg.n_levels);
  levels.push_back(image);
  for (int i = 1; i < cfg.n_levels; ++i) {
    const double s = std::pow(cfg.scale_factor, i);
    const int w = static_cast<int>(std::floor(image.width / s));
    const int h = static_cast<int>(std::floor(image.height / s));
    if (w <= 0 || h <= 0)
      throw PyramidError("pyramid config too deep: level " + std::to_string(i) +
                         " would reach zero pixels");
    levels.push_back(areaDownsample(image, w, h, s));
  }
  return levels;
}

}  // namespace fslam
