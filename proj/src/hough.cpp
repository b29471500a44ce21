// Progressive probabilistic Hough transform (Matas, Galambos & Kittler),
// following the structure of the classic OpenCV implementation: random point
// order, vote, walk the strongest direction with a gap budget, then retract
// the walked pixels' votes.

#include <algorithm>
#include <cmath>
#include <random>

#include "plotdigit/axes.hpp"

namespace plotdigit::axes {

namespace {

struct Pixel {
  int x;
  int y;
};

}  // namespace

Mask dark_pixel_map(const GrayImage& g) {
  const Eigen::Index h = g.rows(), w = g.cols();
  Mask out = Mask::Zero(h, w);
  if (g.size() == 0 || g.maxCoeff() - g.minCoeff() < 32) return out;

  std::array<long, 256> hist{};
  for (Eigen::Index i = 0; i < g.size(); ++i)
    ++hist[static_cast<std::size_t>(std::clamp<long>(std::lround(g.data()[i]), 0, 255))];
  const double total = static_cast<double>(g.size());
  double sum_all = 0;
  for (int i = 0; i < 256; ++i) sum_all += i * double(hist[i]);
  double w_b = 0, sum_b = 0, best = -1;
  int threshold = 128;
  for (int t = 0; t < 256; ++t) {
    w_b += hist[t];
    if (w_b == 0) continue;
    const double w_f = total - w_b;
    if (w_f == 0) break;
    sum_b += t * double(hist[t]);
    const double m_b = sum_b / w_b, m_f = (sum_all - sum_b) / w_f;
    const double between = w_b * w_f * (m_b - m_f) * (m_b - m_f);
    if (between > best) {
      best = between;
      threshold = t;
    }
  }
  threshold = std::clamp(threshold, 64, 200);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) out(y, x) = g(y, x) <= threshold ? 1 : 0;
  return out;
}

std::vector<HoughLine> probabilistic_hough(const Mask& edges, const AxisParams& p) {
  const int height = static_cast<int>(edges.rows());
  const int width = static_cast<int>(edges.cols());
  const int numangle = static_cast<int>(std::lround(3.14159265358979323846 / p.theta_step));
  const int numrho = 2 * (width + height) + 1;
  constexpr int kShift = 16;

  std::vector<float> trig(2 * numangle);
  for (int n = 0; n < numangle; ++n) {
    trig[2 * n] = static_cast<float>(std::cos(n * p.theta_step));
    trig[2 * n + 1] = static_cast<float>(std::sin(n * p.theta_step));
  }

  Mask mask = edges;
  std::vector<Pixel> points;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (mask(y, x)) points.push_back({x, y});

  Plane<int> accum = Plane<int>::Zero(numangle, numrho);
  std::mt19937 rng(p.rng_seed);
  std::vector<HoughLine> lines;

  auto rho_index = [&](int x, int y, int n) {
    return static_cast<int>(std::lround(x * trig[2 * n] + y * trig[2 * n + 1])) + (numrho - 1) / 2;
  };

  for (std::size_t count = points.size(); count > 0; --count) {
    const std::size_t idx = std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
    const Pixel pt = points[idx];
    points[idx] = points[count - 1];
    if (!mask(pt.y, pt.x)) continue;

    int max_val = p.hough_threshold - 1, max_n = 0;
    for (int n = 0; n < numangle; ++n) {
      const int val = ++accum(n, rho_index(pt.x, pt.y, n));
      if (max_val < val) {
        max_val = val;
        max_n = n;
      }
    }
    if (max_val < p.hough_threshold) continue;

    // Walk direction is perpendicular to the normal angle.
    const float a = -trig[2 * max_n + 1];
    const float b = trig[2 * max_n];
    long x0 = pt.x, y0 = pt.y, dx0, dy0;
    const bool xflag = std::fabs(a) > std::fabs(b);
    if (xflag) {
      dx0 = a > 0 ? 1 : -1;
      dy0 = std::lround(b * (1 << kShift) / std::fabs(a));
      y0 = (y0 << kShift) + (1 << (kShift - 1));
    } else {
      dy0 = b > 0 ? 1 : -1;
      dx0 = std::lround(a * (1 << kShift) / std::fabs(b));
      x0 = (x0 << kShift) + (1 << (kShift - 1));
    }

    Pixel line_end[2] = {pt, pt};
    auto walk = [&](int k, auto&& on_pixel) {
      long x = x0, y = y0, dx = dx0, dy = dy0;
      if (k > 0) dx = -dx, dy = -dy;
      int gap = 0;
      for (;; x += dx, y += dy) {
        const int j1 = xflag ? static_cast<int>(x) : static_cast<int>(x >> kShift);
        const int i1 = xflag ? static_cast<int>(y >> kShift) : static_cast<int>(y);
        if (j1 < 0 || j1 >= width || i1 < 0 || i1 >= height) break;
        if (!on_pixel(k, j1, i1, gap)) break;
      }
    };

    for (int k = 0; k < 2; ++k)
      walk(k, [&](int kk, int j1, int i1, int& gap) {
        if (mask(i1, j1)) {
          gap = 0;
          line_end[kk] = {j1, i1};
        } else if (++gap > p.max_line_gap) {
          return false;
        }
        return true;
      });

    const bool good_line = std::abs(line_end[1].x - line_end[0].x) >= p.min_line_length ||
                           std::abs(line_end[1].y - line_end[0].y) >= p.min_line_length;

    for (int k = 0; k < 2; ++k)
      walk(k, [&](int kk, int j1, int i1, int&) {
        if (mask(i1, j1)) {
          if (good_line)
            for (int n = 0; n < numangle; ++n) --accum(n, rho_index(j1, i1, n));
          mask(i1, j1) = 0;
        }
        return !(i1 == line_end[kk].y && j1 == line_end[kk].x);
      });

    if (good_line) {
      HoughLine l;
      l.p0 = Eigen::Vector2d(line_end[0].x, line_end[0].y);
      l.p1 = Eigen::Vector2d(line_end[1].x, line_end[1].y);
      if (l.length() > 0) lines.push_back(l);
    }
  }

  std::stable_sort(lines.begin(), lines.end(),
                   [](const HoughLine& l, const HoughLine& r) { return l.length() > r.length(); });
  return lines;
}

}  // namespace plotdigit::axes
