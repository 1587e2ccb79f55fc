#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace fslam {

/// Row-major 8-bit grayscale raster.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  bool empty() const { return width <= 0 || height <= 0; }

  double meanIntensity() const;
};

class ImageIoError : public std::runtime_error {
 public:
  explicit ImageIoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Loads an 8-bit PNG or PGM image by extension; color PNG inputs are
/// converted to luma with ITU-R 601 weights.
GrayImage loadImage(const std::filesystem::path& path);
void saveImage(const GrayImage& img, const std::filesystem::path& path);

GrayImage loadPng(const std::filesystem::path& path);
void savePng(const GrayImage& img, const std::filesystem::path& path);
GrayImage loadPgm(const std::filesystem::path& path);
void savePgm(const GrayImage& img, const std::filesystem::path& path);

}  // namespace fslam
