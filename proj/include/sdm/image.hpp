#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace sdm {

// 8-bit greyscale image, row-major.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }

  bool contains(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

// Bilinear blend of the 4 surrounding pixels; exact value at integer
// coordinates. Valid for 0 <= x <= width-2, 0 <= y <= height-2 (one past is
// tolerated when the fractional part is zero).
double sample_bilinear(const Image8& image, double x, double y);

inline bool bilinear_in_bounds(const Image8& image, double x, double y) {
  return x >= 0.0 && y >= 0.0 && x <= image.width - 2 + 1e-12 &&
         y <= image.height - 2 + 1e-12;
}

// Central-difference gradient (gx, gy) in intensity per pixel, with
// replicated borders so it is total on the image.
Eigen::Vector2d central_gradient(const Image8& image, int x, int y);

// Gradient at a subpixel position via bilinear samples of the image at
// (x±1, y) and (x, y±1). Caller keeps coordinates >= 1 px inside.
Eigen::Vector2d gradient_bilinear(const Image8& image, double x, double y);

}  // namespace sdm
