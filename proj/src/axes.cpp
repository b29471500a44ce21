#include "plotdigit/axes.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "plotdigit/errors.hpp"

namespace plotdigit::axes {

double HoughLine::angle() const {
  const Eigen::Vector2d d = p1 - p0;
  double a = std::atan2(d.y(), d.x());
  if (a < 0) a += 3.14159265358979323846;
  if (a >= 3.14159265358979323846) a -= 3.14159265358979323846;
  return a;
}

double HoughLine::cos_horizontal() const {
  const double len = length();
  return len > 0 ? std::abs(p1.x() - p0.x()) / len : 0.0;
}

double HoughLine::cos_vertical() const {
  const double len = length();
  return len > 0 ? std::abs(p1.y() - p0.y()) / len : 0.0;
}

std::vector<HoughLine> detect_line_segments(const GrayImage& g, const AxisParams& p) {
  return probabilistic_hough(dark_pixel_map(g), p);
}

double edge_score(const GrayImage& img, const BBox& box) {
  if (!box.within(static_cast<int>(img.cols()), static_cast<int>(img.rows())))
    throw std::out_of_range("edge_score: box outside image");
  double s = 0;
  for (int u = box.x0; u < box.x1; ++u) s += img(box.y1 - 1, u);
  for (int v = box.y0; v < box.y1; ++v) s += img(v, box.x0);
  return s;
}

BBox propose_plot_region(const GrayImage& g, const std::vector<HoughLine>& lines,
                         const AxisParams& p) {
  const int w = static_cast<int>(g.cols()), h = static_cast<int>(g.rows());
  const HoughLine* x_axis = nullptr;
  const HoughLine* y_axis = nullptr;
  for (const auto& l : lines) {
    const double c2h = l.cos_horizontal() * l.cos_horizontal();
    const double c2v = l.cos_vertical() * l.cos_vertical();
    if (c2h > p.eps1 && l.length() >= p.eps2 * w && (!x_axis || l.mean_y() > x_axis->mean_y()))
      x_axis = &l;
    if (c2v > p.eps1 && l.length() >= p.eps2 * h && (!y_axis || l.mean_x() < y_axis->mean_x()))
      y_axis = &l;
  }
  if (!x_axis || !y_axis) throw NoAxesFound("no qualifying horizontal/vertical axis segments");

  const int ox = static_cast<int>(std::lround(y_axis->mean_x()));
  const int oy = static_cast<int>(std::lround(x_axis->mean_y()));
  int x_right = static_cast<int>(std::max(x_axis->p0.x(), x_axis->p1.x()));
  int y_top = static_cast<int>(std::min(y_axis->p0.y(), y_axis->p1.y()));

  const Mask dark = dark_pixel_map(g);
  for (int y = 0; y < oy; ++y)
    for (int x = ox + 1; x < w; ++x)
      if (dark(y, x)) {
        x_right = std::max(x_right, x);
        y_top = std::min(y_top, y);
      }
  BBox box{ox, y_top, x_right + 1, oy + 1};
  box.x0 = std::clamp(box.x0, 0, w - 1);
  box.y1 = std::clamp(box.y1, 1, h);
  box.x1 = std::clamp(box.x1, box.x0 + 1, w);
  box.y0 = std::clamp(box.y0, 0, box.y1 - 1);
  return box;
}

BBox propose_plot_region(const RasterImage& img, const AxisParams& p) {
  const GrayImage g = to_grayscale(img);
  return propose_plot_region(g, detect_line_segments(g, p), p);
}

namespace {

struct Candidate {
  const HoughLine* line = nullptr;
  double distance = 0;
};

/// Nearest constraint-satisfying segment to an axis-parallel edge at
/// `position`; `vertical` selects the left edge.
std::optional<Candidate> nearest_candidate(const std::vector<HoughLine>& lines, bool vertical,
                                           double position, double edge_length, const AxisParams& p) {
  std::optional<Candidate> best;
  for (const auto& l : lines) {
    const double c = vertical ? l.cos_vertical() : l.cos_horizontal();
    if (!(c * c > p.eps1)) continue;
    if (!(edge_length > 0) || !(l.length() / edge_length > p.eps2)) continue;
    const double d = std::abs((vertical ? l.mean_x() : l.mean_y()) - position);
    if (!best || d < best->distance || (d == best->distance && l.length() > best->line->length()))
      best = Candidate{&l, d};
  }
  return best;
}

HoughLine edge_as_line(const BBox& b, bool vertical) {
  HoughLine l;
  if (vertical) {
    l.p0 = Eigen::Vector2d(b.x0, b.y0);
    l.p1 = Eigen::Vector2d(b.x0, b.y1 - 1);
  } else {
    l.p0 = Eigen::Vector2d(b.x0, b.y1 - 1);
    l.p1 = Eigen::Vector2d(b.x1 - 1, b.y1 - 1);
  }
  return l;
}

}  // namespace

Refinement refine_box(const BBox& box, const std::vector<HoughLine>& lines, const AxisParams& p) {
  Refinement r;
  r.box = box;
  const auto left = nearest_candidate(lines, true, box.x0, box.height(), p);
  const auto bottom = nearest_candidate(lines, false, box.y1 - 1, box.width(), p);

  if (left) {
    const int x0 = static_cast<int>(std::lround(left->line->mean_x()));
    if (x0 < box.x1 && x0 >= 0) {
      r.box.x0 = x0;
      r.left_distance = left->distance;
    } else {
      r.left_flagged = true;
    }
  } else {
    r.left_flagged = true;
  }
  if (bottom) {
    const int y1 = static_cast<int>(std::lround(bottom->line->mean_y())) + 1;
    if (y1 > box.y0) {
      r.box.y1 = y1;
      r.bottom_distance = bottom->distance;
    } else {
      r.bottom_flagged = true;
    }
  } else {
    r.bottom_flagged = true;
  }

  r.axes.y_axis = r.left_flagged ? edge_as_line(r.box, true) : *left->line;
  r.axes.x_axis = r.bottom_flagged ? edge_as_line(r.box, false) : *bottom->line;
  r.axes.origin = r.box.origin();
  return r;
}

}  // namespace plotdigit::axes
