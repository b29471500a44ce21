#include "plotdigit/raster.hpp"

namespace plotdigit {

RasterImage stretch_x(const RasterImage& img, int factor) {
  if (factor < 1) throw std::invalid_argument("stretch_x: factor < 1");
  const int w = img.width();
  const int ow = (w - 1) * factor + 1;
  RasterImage out(ow, img.height());
  for (int j = 0; j < ow; ++j) {
    const int x0 = j / factor;
    const int x1 = std::min(x0 + 1, w - 1);
    const double t = double(j - x0 * factor) / factor;
    for (int y = 0; y < img.height(); ++y) {
      const Eigen::Vector3d c =
          (1.0 - t) * img.at(x0, y).cast<double>() + t * img.at(x1, y).cast<double>();
      out.set(j, y, rgb(int(std::lround(c[0])), int(std::lround(c[1])), int(std::lround(c[2]))));
    }
  }
  return out;
}

}  // namespace plotdigit
