#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "plotdigit/image_io.hpp"
#include "plotdigit/raster.hpp"

using namespace plotdigit;

namespace {

GrayImage affine(int w, int h, double a, double b, double c = 0) {
  GrayImage g(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) g(y, x) = a * x + b * y + c;
  return g;
}

bool interior(const GrayImage& g, int x, int y, int margin) {
  return x >= margin && y >= margin && x < g.cols() - margin && y < g.rows() - margin;
}

}  // namespace

TEST_CASE("grayscale weights") {
  RasterImage black(4, 3, rgb(0, 0, 0));
  CHECK((to_grayscale(black) == 0).all());
  RasterImage white(4, 3, rgb(255, 255, 255));
  CHECK((to_grayscale(white) - 255).abs().maxCoeff() < 1e-9);
  RasterImage red(1, 1, rgb(255, 0, 0));
  CHECK(to_grayscale(red)(0, 0) == doctest::Approx(76.245).epsilon(1e-12));
}

TEST_CASE("raster invariants") {
  CHECK_THROWS_AS(RasterImage(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(RasterImage(2, 2, std::vector<std::uint8_t>(11)), std::invalid_argument);
  RasterImage img(5, 4);
  CHECK(img.pixels().size() == 5u * 4u * 3u);
  img.set(2, 1, rgb(1, 2, 3));
  CHECK(img.crop({2, 1, 4, 3}).at(0, 0) == rgb(1, 2, 3));
}

TEST_CASE("gradient of constant and ramp images") {
  GrayImage c = GrayImage::Constant(20, 30, 117.0);
  for (double sigma : {0.0, 1.0, 2.5}) {
    const auto g = gradient_field(c, sigma);
    CHECK(g.gx.abs().maxCoeff() == 0);
    CHECK(g.gy.abs().maxCoeff() == 0);
  }
  const auto g = gradient_field(affine(30, 20, 1, 0), 0.0);
  for (int y = 1; y < 19; ++y)
    for (int x = 1; x < 29; ++x) {
      CHECK(g.gx(y, x) == doctest::Approx(1.0));
      CHECK(g.gy(y, x) == doctest::Approx(0.0));
    }
  CHECK_THROWS_AS(gradient_field(c, -1.0), std::invalid_argument);
}

TEST_CASE("gradient of a Gaussian bump matches the analytic derivative") {
  const int w = 101, h = 101;
  const double cx = 50, cy = 50, s = 12, amp = 200;
  GrayImage g(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) g(y, x) = amp * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
  const auto grad = gradient_field(g, 1.0);
  double max_rel = 0;
  const double peak = amp / s * std::exp(-0.5);  // max |dI/dx|
  for (int y = 10; y < h - 10; ++y)
    for (int x = 10; x < w - 10; ++x) {
      const double e = std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
      const double dx = -amp * (x - cx) / (s * s) * e;
      const double dy = -amp * (y - cy) / (s * s) * e;
      // relative to the derivative's scale so near-zero crossings do not dominate
      max_rel = std::max({max_rel, std::abs(grad.gx(y, x) - dx) / peak, std::abs(grad.gy(y, x) - dy) / peak});
    }
  CHECK(max_rel < 0.05);
}

TEST_CASE("velocity of affine surfaces") {
  const GrayImage g = affine(40, 30, 1, 2, 3);
  const auto v = velocity_field(gradient_field(g, 1.0), 10.0, 1.0);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) {
      CHECK(v.valid(y, x) == 1);
      // replicated borders bend the blurred surface near the edge
      if (interior(g, x, y, 4)) CHECK(v.v(y, x) == doctest::Approx(-0.5).epsilon(1e-9));
    }

  const auto flat = velocity_field(gradient_field(GrayImage::Constant(10, 10, 40.0), 1.0), 10.0, 1.0);
  CHECK((flat.valid == 0).all());
  CHECK((flat.v == 0).all());

  // steep: -a/b beyond v_max gets clamped
  const auto steep = velocity_field(gradient_field(affine(20, 20, 30, 1), 0.0), 10.0, 1.0);
  CHECK(steep.v(10, 10) == doctest::Approx(-10.0));

  CHECK_THROWS_AS(velocity_field(gradient_field(GrayImage::Constant(3, 3, 0.0), 0.0), 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("property: velocity is finite and bounded on random images") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    GrayImage g(17, 23);
    for (auto& x : g.reshaped()) x = u(rng);
    const double vmax = 1 + trial % 7;
    const auto v = velocity_field(gradient_field(g, trial % 3 * 0.7), vmax, 0.5);
    CHECK(v.v.isFinite().all());
    CHECK(v.v.abs().maxCoeff() <= vmax);
    for (Eigen::Index i = 0; i < v.v.size(); ++i)
      if (!v.valid.data()[i]) CHECK(v.v.data()[i] == 0);
  }
}

TEST_CASE("property: affine surfaces give -a/b exactly in the interior") {
  for (double a : {-3.0, -1.0, 0.0, 0.5, 2.0})
    for (double b : {-4.0, -1.5, 1.0, 2.5, 6.0}) {
      const GrayImage g = affine(25, 25, a, b, 128);
      // eps_g below the smallest |b| so blur round-off can't sit on the threshold
      const auto v = velocity_field(gradient_field(g, 1.0), 100.0, 0.5);
      for (int y = 0; y < 25; ++y)
        for (int x = 0; x < 25; ++x)
          if (interior(g, x, y, 4)) CHECK(std::abs(v.v(y, x) + a / b) <= 1e-9);
    }
}

TEST_CASE("anti-aliased line of slope 1.5 yields median velocity near 1.5") {
  // Dark line y = y0 + 1.5 x with coverage-based anti-aliasing, 3 px thick.
  const int w = 80, h = 160;
  const double m = 1.5, y0 = 20, half = 1.5;
  RasterImage img(w, h);
  std::vector<std::pair<int, int>> line_px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double cover = 0;
      for (int sy = 0; sy < 4; ++sy)
        for (int sx = 0; sx < 4; ++sx) {
          const double px = x + (sx + 0.5) / 4 - 0.5, py = y + (sy + 0.5) / 4 - 0.5;
          const double dist = std::abs(py - (y0 + m * px)) / std::sqrt(1 + m * m);
          cover += dist <= half ? 1.0 / 16 : 0;
        }
      const int v = static_cast<int>(std::lround(255 * (1 - cover)));
      img.set(x, y, rgb(v, v, v));
      if (cover > 0 && x > 5 && x < w - 5) line_px.emplace_back(x, y);
    }
  const auto vel = velocity_field(gradient_field(to_grayscale(img), 1.0), 10.0, 1.0);
  std::vector<double> vs;
  for (auto [x, y] : line_px)
    if (vel.valid(y, x)) vs.push_back(vel.v(y, x));
  REQUIRE(!vs.empty());
  std::nth_element(vs.begin(), vs.begin() + vs.size() / 2, vs.end());
  CHECK(std::abs(vs[vs.size() / 2] - 1.5) <= 0.2);
}

TEST_CASE("stretch_x interpolates linearly") {
  Plane<double> p(1, 3);
  p << 0, 10, 40;
  const auto s = stretch_x(p, 2);
  REQUIRE(s.cols() == 5);
  CHECK(s(0, 1) == doctest::Approx(5));
  CHECK(s(0, 3) == doctest::Approx(25));
  CHECK(s(0, 4) == doctest::Approx(40));
}

TEST_CASE("png round trip") {
  RasterImage img(7, 5);
  std::mt19937 rng(1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) img.set(x, y, rgb(rng() % 256, rng() % 256, rng() % 256));
  const auto bytes = io::encode_png(img);
  CHECK(io::decode_image(bytes) == img);
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5};
  CHECK_THROWS(io::decode_image(junk));
}
