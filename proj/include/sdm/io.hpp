#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdm/image.hpp"

namespace sdm {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 8-bit grayscale image loader: dispatches on file content (PNG magic or
// PGM "P5"). PNG input is converted to grayscale if needed.
Image8 load_image(const std::string& path);

Image8 read_pgm8(const std::string& path);
void write_pgm8(const std::string& path, const Image8& image);

// 16-bit grayscale PGM, big-endian sample order per the Netpbm spec.
struct Image16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;

  std::uint16_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

Image16 read_pgm16(const std::string& path);
void write_pgm16(const std::string& path, const Image16& image);

Image8 read_png_gray(const std::string& path);

// PFM float maps, single channel, little-endian (negative scale), rows
// bottom-up as the format requires. NaN marks invalid pixels.
void write_pfm(const std::string& path, const std::vector<float>& data,
               int width, int height);
std::vector<float> read_pfm(const std::string& path, int& width, int& height);

}  // namespace sdm
