#pragma once

// Image containers and the per-pixel differential quantities the tracer
// consumes. Planes use Eigen's (row, col) = (y, x) indexing throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "plotdigit/geometry.hpp"

namespace plotdigit {

template <typename Scalar>
using Plane = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Mask = Plane<std::uint8_t>;

using Rgb = Eigen::Matrix<std::uint8_t, 3, 1>;

inline Rgb rgb(int r, int g, int b) {
  return Rgb(static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
             static_cast<std::uint8_t>(b));
}

inline double color_distance(const Rgb& a, const Rgb& b) {
  return (a.cast<double>() - b.cast<double>()).norm();
}

/// 8-bit RGB raster, row-major interleaved.
class RasterImage {
 public:
  RasterImage(int width, int height, const Rgb& fill = rgb(255, 255, 255))
      : width_(width), height_(height) {
    check_dims();
    pixels_.resize(static_cast<std::size_t>(width) * height * 3);
    for (std::size_t i = 0; i < pixels_.size(); i += 3) {
      pixels_[i] = fill[0];
      pixels_[i + 1] = fill[1];
      pixels_[i + 2] = fill[2];
    }
  }

  RasterImage(int width, int height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims();
    if (pixels_.size() != static_cast<std::size_t>(width) * height * 3)
      throw std::invalid_argument("RasterImage: pixel buffer length != width*height*3");
  }

  int width() const { return width_; }
  int height() const { return height_; }

  Rgb at(int x, int y) const {
    const std::size_t i = index(x, y);
    return Rgb(pixels_[i], pixels_[i + 1], pixels_[i + 2]);
  }

  void set(int x, int y, const Rgb& c) {
    const std::size_t i = index(x, y);
    pixels_[i] = c[0];
    pixels_[i + 1] = c[1];
    pixels_[i + 2] = c[2];
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }

  RasterImage crop(const BBox& box) const {
    if (box.x0 < 0 || box.y0 < 0 || box.x1 > width_ || box.y1 > height_ || !box.valid())
      throw std::out_of_range("RasterImage::crop: box outside image");
    RasterImage out(box.width(), box.height());
    for (int y = box.y0; y < box.y1; ++y)
      for (int x = box.x0; x < box.x1; ++x) out.set(x - box.x0, y - box.y0, at(x, y));
    return out;
  }

  bool operator==(const RasterImage&) const = default;

 private:
  void check_dims() const {
    if (width_ < 1 || height_ < 1) throw std::invalid_argument("RasterImage: empty dimensions");
  }
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;
};

/// Luminance in [0, 255].
template <typename Scalar = double>
using GrayImageT = Plane<Scalar>;
using GrayImage = GrayImageT<double>;

template <typename Scalar>
struct GradientFieldT {
  Plane<Scalar> gx;
  Plane<Scalar> gy;

  Eigen::Index width() const { return gx.cols(); }
  Eigen::Index height() const { return gx.rows(); }
};
using GradientField = GradientFieldT<double>;

/// Vertical displacement per unit horizontal step; `valid` is 0 where the
/// vertical gradient is too weak to divide by.
template <typename Scalar>
struct VelocityFieldT {
  Plane<Scalar> v;
  Mask valid;
  Plane<Scalar> weight;  ///< gy^2 where valid, else 0; pools velocities Lucas-Kanade style

  Eigen::Index width() const { return v.cols(); }
  Eigen::Index height() const { return v.rows(); }
};
using VelocityField = VelocityFieldT<double>;

template <typename Scalar = double>
GrayImageT<Scalar> to_grayscale(const RasterImage& img) {
  GrayImageT<Scalar> out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Rgb c = img.at(x, y);
      out(y, x) = Scalar(0.299) * c[0] + Scalar(0.587) * c[1] + Scalar(0.114) * c[2];
    }
  return out;
}

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma). sigma <= 0 gives {1}.
template <typename Scalar>
std::vector<Scalar> gaussian_kernel(Scalar sigma) {
  if (!(sigma > Scalar(0))) return {Scalar(1)};
  const int radius = static_cast<int>(std::ceil(3 * sigma));
  std::vector<Scalar> k(2 * radius + 1);
  Scalar sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-Scalar(i * i) / (2 * sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated borders.
template <typename Derived>
Plane<typename Derived::Scalar> gaussian_blur(const Eigen::ArrayBase<Derived>& src,
                                              typename Derived::Scalar sigma) {
  using Scalar = typename Derived::Scalar;
  Plane<Scalar> in = src;
  const auto k = gaussian_kernel<Scalar>(sigma);
  if (k.size() == 1) return in;
  const int r = static_cast<int>(k.size() / 2);
  const Eigen::Index h = in.rows(), w = in.cols();
  Plane<Scalar> tmp(h, w), out(h, w);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (int i = -r; i <= r; ++i) {
        const Eigen::Index xx = std::clamp<Eigen::Index>(x + i, 0, w - 1);
        acc += k[i + r] * in(y, xx);
      }
      tmp(y, x) = acc;
    }
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      Scalar acc = 0;
      for (int i = -r; i <= r; ++i) {
        const Eigen::Index yy = std::clamp<Eigen::Index>(y + i, 0, h - 1);
        acc += k[i + r] * tmp(yy, x);
      }
      out(y, x) = acc;
    }
  return out;
}

/// Gaussian presmoothing followed by a normalized 3x3 Sobel operator in the
/// interior. Border rows and columns fall back to one-sided (or central,
/// where available) differences along the derivative axis.
template <typename Derived>
GradientFieldT<typename Derived::Scalar> gradient_field(const Eigen::ArrayBase<Derived>& gray,
                                                        typename Derived::Scalar smooth_sigma) {
  using Scalar = typename Derived::Scalar;
  if (smooth_sigma < Scalar(0)) throw std::invalid_argument("gradient_field: smooth_sigma < 0");
  const Plane<Scalar> s = gaussian_blur(gray, smooth_sigma);
  const Eigen::Index h = s.rows(), w = s.cols();
  GradientFieldT<Scalar> g{Plane<Scalar>::Zero(h, w), Plane<Scalar>::Zero(h, w)};

  auto diff_x = [&](Eigen::Index y, Eigen::Index x) -> Scalar {
    if (w < 2) return 0;
    if (x == 0) return s(y, 1) - s(y, 0);
    if (x == w - 1) return s(y, w - 1) - s(y, w - 2);
    return (s(y, x + 1) - s(y, x - 1)) / 2;
  };
  auto diff_y = [&](Eigen::Index y, Eigen::Index x) -> Scalar {
    if (h < 2) return 0;
    if (y == 0) return s(1, x) - s(0, x);
    if (y == h - 1) return s(h - 1, x) - s(h - 2, x);
    return (s(y + 1, x) - s(y - 1, x)) / 2;
  };

  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      if (y > 0 && y < h - 1 && x > 0 && x < w - 1) {
        g.gx(y, x) = ((s(y - 1, x + 1) - s(y - 1, x - 1)) + 2 * (s(y, x + 1) - s(y, x - 1)) +
                      (s(y + 1, x + 1) - s(y + 1, x - 1))) / 8;
        g.gy(y, x) = ((s(y + 1, x - 1) - s(y - 1, x - 1)) + 2 * (s(y + 1, x) - s(y - 1, x)) +
                      (s(y + 1, x + 1) - s(y - 1, x + 1))) / 8;
      } else {
        g.gx(y, x) = diff_x(y, x);
        g.gy(y, x) = diff_y(y, x);
      }
    }
  return g;
}

/// v = -gx / gy where |gy| >= eps_g, clamped to [-v_max, v_max].
template <typename Scalar>
VelocityFieldT<Scalar> velocity_field(const GradientFieldT<Scalar>& grad, Scalar v_max,
                                      Scalar eps_g) {
  if (!(v_max > 0) || !(eps_g > 0))
    throw std::invalid_argument("velocity_field: v_max and eps_g must be positive");
  const Eigen::Index h = grad.height(), w = grad.width();
  // a few ulps of blur round-off must not push |gy| == eps_g below the bar
  const Scalar bar = eps_g * (Scalar(1) - Scalar(64) * std::numeric_limits<Scalar>::epsilon());
  VelocityFieldT<Scalar> out{Plane<Scalar>::Zero(h, w), Mask::Zero(h, w), Plane<Scalar>::Zero(h, w)};
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) {
      const Scalar gy = grad.gy(y, x);
      const Scalar gx = grad.gx(y, x);
      if (std::abs(gy) >= bar && std::isfinite(gx) && std::isfinite(gy)) {
        out.v(y, x) = std::clamp(-gx / gy, -v_max, v_max);
        out.valid(y, x) = 1;
        out.weight(y, x) = gy * gy;
      }
    }
  return out;
}

/// Linear resampling along x so that output column j samples input column
/// j / factor; output width is (w - 1) * factor + 1.
template <typename Derived>
Plane<typename Derived::Scalar> stretch_x(const Eigen::ArrayBase<Derived>& src, int factor) {
  using Scalar = typename Derived::Scalar;
  if (factor < 1) throw std::invalid_argument("stretch_x: factor < 1");
  const Eigen::Index h = src.rows(), w = src.cols();
  const Eigen::Index ow = (w - 1) * factor + 1;
  Plane<Scalar> out(h, ow);
  for (Eigen::Index j = 0; j < ow; ++j) {
    const Eigen::Index x0 = j / factor;
    const Eigen::Index x1 = std::min(x0 + 1, w - 1);
    const Scalar t = Scalar(j - x0 * factor) / Scalar(factor);
    out.col(j) = (Scalar(1) - t) * src.col(x0) + t * src.col(x1);
  }
  return out;
}

RasterImage stretch_x(const RasterImage& img, int factor);

}  // namespace plotdigit
