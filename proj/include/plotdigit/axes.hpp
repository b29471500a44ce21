#pragma once

#include <vector>

#include <Eigen/Core>

#include "plotdigit/geometry.hpp"
#include "plotdigit/raster.hpp"

namespace plotdigit::axes {

/// Straight segment between two pixel centers.
struct HoughLine {
  Eigen::Vector2d p0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d p1 = Eigen::Vector2d::Zero();

  double length() const { return (p1 - p0).norm(); }
  /// Direction angle in [0, pi).
  double angle() const;
  /// |cos| of the angle to the horizontal / vertical direction.
  double cos_horizontal() const;
  double cos_vertical() const;
  double mean_x() const { return 0.5 * (p0.x() + p1.x()); }
  double mean_y() const { return 0.5 * (p0.y() + p1.y()); }
};

struct AxisPair {
  HoughLine x_axis;
  HoughLine y_axis;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
};

struct AxisParams {
  double eps1 = 0.98;  ///< threshold on squared cosine similarity with the edge direction
  double eps2 = 0.5;   ///< threshold on segment length / edge length
  int hough_threshold = 40;
  int min_line_length = 30;
  int max_line_gap = 3;
  double theta_step = 3.14159265358979323846 / 180;
  unsigned rng_seed = 0x5eed;
};

/// Foreground of the Hough transform: pixels darker than an Otsu threshold
/// (clamped to [64, 200]); empty for near-uniform images.
Mask dark_pixel_map(const GrayImage& g);

/// Probabilistic Hough transform over an arbitrary binary map. Segments come
/// back sorted by length, longest first.
std::vector<HoughLine> probabilistic_hough(const Mask& edges, const AxisParams& p);

/// probabilistic_hough over dark_pixel_map(g).
std::vector<HoughLine> detect_line_segments(const GrayImage& g, const AxisParams& p);

/// Sum of intensities along the box's bottom row and left column. Darker,
/// axis-like edges score lower.
double edge_score(const GrayImage& img, const BBox& box);

/// Classical stand-in for a trained region detector: the bottommost long
/// horizontal and leftmost long vertical segments define the origin, and
/// the dark content right of / above them defines the far corner.
/// Throws NoAxesFound.
BBox propose_plot_region(const RasterImage& img, const AxisParams& p);
BBox propose_plot_region(const GrayImage& g, const std::vector<HoughLine>& lines, const AxisParams& p);

struct Refinement {
  BBox box;
  AxisPair axes;
  bool left_flagged = false;    ///< no candidate for the left edge; edge left as-is
  bool bottom_flagged = false;  ///< no candidate for the bottom edge
  double left_distance = 0;     ///< D_dist of the chosen candidate
  double bottom_distance = 0;
};

/// Snaps the box's left and bottom edges onto the nearest segment that is
/// parallel enough (cos^2 > eps1) and long enough (length ratio > eps2).
/// Ties on distance prefer the longer segment. The top and right edges are
/// never moved.
Refinement refine_box(const BBox& box, const std::vector<HoughLine>& lines, const AxisParams& p);

}  // namespace plotdigit::axes
