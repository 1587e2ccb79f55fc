#include "fslam/imaging/gamma.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace fslam {

std::uint8_t gammaTransformPixel(std::uint8_t p, const GammaParam& g) {
  const double v = 255.0 * std::pow(p / 255.0, g.value());
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

GrayImage gammaTransform(const GrayImage& img, const GammaParam& g) {
  std::array<std::uint8_t, 256> lut;
  for (int p = 0; p < 256; ++p) lut[p] = gammaTransformPixel(static_cast<std::uint8_t>(p), g);
  GrayImage out(img.width, img.height);
  std::transform(img.data.begin(), img.data.end(), out.data.begin(),
                 [&lut](std::uint8_t p) { return lut[p]; });
  return out;
}

int distortSequence(const std::filesystem::path& input_dir,
                    const std::filesystem::path& output_dir, const GammaParam& g) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(input_dir))
    throw ImageIoError("unreadable input directory: " + input_dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".PNG" || ext == ".pgm" || ext == ".PGM")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (!fs::is_directory(output_dir))
    throw ImageIoError("unwritable output directory: " + output_dir.string());

  int count = 0;
  for (const auto& file : files) {
    const GrayImage img = loadImage(file);
    saveImage(gammaTransform(img, g), output_dir / file.filename());
    ++count;
  }
  return count;
}

}  // namespace fslam
