#pragma once

#include <Eigen/Core>

namespace plotdigit {

/// Pixel box, top-left inclusive, bottom-right exclusive.
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool valid() const { return x0 < x1 && y0 < y1; }
  bool within(int image_width, int image_height) const {
    return valid() && x0 >= 0 && y0 >= 0 && x1 <= image_width && y1 <= image_height;
  }
  /// Axis origin implied by the box: left column, bottom row.
  Eigen::Vector2d origin() const { return {double(x0), double(y1 - 1)}; }

  bool operator==(const BBox&) const = default;
};

}  // namespace plotdigit
