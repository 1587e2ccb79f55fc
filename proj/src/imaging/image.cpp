#include "fslam/imaging/image.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace fslam {

double GrayImage::meanIntensity() const {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (std::uint8_t p : data) sum += p;
  return sum / static_cast<double>(data.size());
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

GrayImage loadPng(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw ImageIoError("cannot open PNG for reading: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageIoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageIoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError("malformed PNG: " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  // Normalize every input to 8-bit gray (ITU-R 601 luma for color inputs).
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_color_type(png, info) & PNG_COLOR_MASK_COLOR)
    png_set_rgb_to_gray(png, PNG_ERROR_ACTION_NONE, 0.299, 0.587);
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  GrayImage img(static_cast<int>(png_get_image_width(png, info)),
                static_cast<int>(png_get_image_height(png, info)));
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.data.data() + static_cast<std::size_t>(y) * img.width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void savePng(const GrayImage& img, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw ImageIoError("cannot open PNG for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw ImageIoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ImageIoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError("PNG write failed: " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

GrayImage loadPgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open PGM for reading: " + path.string());

  auto next_token = [&in, &path]() -> std::string {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw ImageIoError("truncated PGM header: " + path.string());
  };

  const std::string magic = next_token();
  if (magic != "P5" && magic != "P2") throw ImageIoError("not a PGM file: " + path.string());
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw ImageIoError("unsupported PGM header: " + path.string());

  GrayImage img(w, h);
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
      throw ImageIoError("truncated PGM data: " + path.string());
  } else {
    for (auto& px : img.data) {
      int v;
      if (!(in >> v)) throw ImageIoError("truncated PGM data: " + path.string());
      px = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

void savePgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot open PGM for writing: " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw ImageIoError("PGM write failed: " + path.string());
}

GrayImage loadImage(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") return loadPng(path);
  if (ext == ".pgm" || ext == ".PGM") return loadPgm(path);
  throw ImageIoError("unsupported image extension: " + path.string());
}

void saveImage(const GrayImage& img, const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") {
    savePng(img, path);
  } else if (ext == ".pgm" || ext == ".PGM") {
    savePgm(img, path);
  } else {
    throw ImageIoError("unsupported image extension: " + path.string());
  }
}

}  // namespace fslam
