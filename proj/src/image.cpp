#include "sdm/image.hpp"

#include <algorithm>
#include <cmath>

namespace sdm {

double sample_bilinear(const Image8& image, double x, double y) {
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  double fx = x - x0;
  double fy = y - y0;
  // Keep the 2x2 block in bounds for zero-fraction samples on the last
  // row/column.
  if (x0 >= image.width - 1) {
    x0 = image.width - 2;
    fx = x - x0;
  }
  if (y0 >= image.height - 1) {
    y0 = image.height - 2;
    fy = y - y0;
  }
  const double v00 = image.at(x0, y0);
  const double v10 = image.at(x0 + 1, y0);
  const double v01 = image.at(x0, y0 + 1);
  const double v11 = image.at(x0 + 1, y0 + 1);
  const double top = v00 + fx * (v10 - v00);
  const double bot = v01 + fx * (v11 - v01);
  return top + fy * (bot - top);
}

Eigen::Vector2d central_gradient(const Image8& image, int x, int y) {
  const int xm = std::max(0, x - 1);
  const int xp = std::min(image.width - 1, x + 1);
  const int ym = std::max(0, y - 1);
  const int yp = std::min(image.height - 1, y + 1);
  return {0.5 * (static_cast<double>(image.at(xp, y)) - image.at(xm, y)),
          0.5 * (static_cast<double>(image.at(x, yp)) - image.at(x, ym))};
}

Eigen::Vector2d gradient_bilinear(const Image8& image, double x, double y) {
  return {0.5 * (sample_bilinear(image, x + 1.0, y) -
                 sample_bilinear(image, x - 1.0, y)),
          0.5 * (sample_bilinear(image, x, y + 1.0) -
                 sample_bilinear(image, x, y - 1.0))};
}

}  // namespace sdm
