#pragma once

// Deterministic synthetic spectra plots with exact ground truth.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "plotdigit/geometry.hpp"
#include "plotdigit/raster.hpp"

namespace plotdigit::synth {

enum class PeakShape { gaussian, lorentzian };

/// center and width are in data-x units; amplitude is in pixels (the y axis
/// carries no data semantics).
struct PeakSpec {
  double center = 0;
  double amplitude = 1;
  double width = 1;
  PeakShape shape = PeakShape::gaussian;
};

struct LineSpec {
  std::vector<PeakSpec> peaks;
  double offset = 20;  ///< baseline height above the x axis, px
  double drift = 0;    ///< linear baseline rise across the region, px
  Rgb color = rgb(31, 119, 180);
  double stroke_width = 2;
};

struct SceneSpec {
  int width = 480;
  int height = 360;
  int origin_x = 60;   ///< y-axis column (region x0)
  int origin_y = 300;  ///< x-axis row (region y1 - 1)
  int plot_width = 400;
  int plot_height = 280;
  int axis_width = 1;  ///< axis strokes grow right/up from the origin
  Rgb axis_color = rgb(0, 0, 0);

  // x-axis ticks: tick k sits at column origin_x + tick_first + k * tick_spacing
  // and carries the value tick_value0 + k * tick_step.
  int tick_first = 40;
  int tick_spacing = 80;
  int tick_count = 5;
  double tick_value0 = 100;
  double tick_step = 100;
  int tick_decimals = 0;
  int tick_length = 5;
  int label_scale = 2;
  int label_gap = 4;
  bool draw_ticks = true;
  bool draw_labels = true;
  bool draw_gridlines = false;
  Rgb grid_color = rgb(200, 200, 200);

  std::vector<LineSpec> lines;

  double noise_sigma = 0;
  double blur_sigma = 0;
  std::uint64_t seed = 0;
  bool allow_similar_colors = false;

  BBox region() const {
    return {origin_x, origin_y + 1 - plot_height, origin_x + plot_width, origin_y + 1};
  }
  double data_x(double px) const {
    return tick_value0 + (px - (origin_x + tick_first)) * tick_step / tick_spacing;
  }
  int tick_px(int k) const { return origin_x + tick_first + k * tick_spacing; }
  std::string tick_label(int k) const;
};

struct GroundTruth {
  std::string image;
  BBox region;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  std::vector<std::pair<double, double>> ticks;  ///< (px, value)
  std::vector<Eigen::VectorXd> lines;            ///< y px per region column
};

/// Curve height profile of one line, in image y px, for each region column.
Eigen::VectorXd line_profile(const SceneSpec& spec, const LineSpec& line);

/// Throws InvalidScene when the spec breaks its invariants or a curve leaves
/// the plot region.
void validate(const SceneSpec& spec);

std::pair<RasterImage, GroundTruth> generate_scene(const SceneSpec& spec);

struct SuiteOptions {
  int min_lines = 2;
  int max_lines = 6;
  double noise_sigma = 4;
  double blur_sigma = 0.5;
  bool sharp_peaks = false;
};

/// Random but seed-determined scene spec.
SceneSpec random_scene_spec(std::uint64_t seed, const SuiteOptions& opts);

/// Standard suite: M in [2, 6], noise 4, blur 0.5.
std::vector<SceneSpec> standard_suite(int count, std::uint64_t seed);
/// Noise-free, blur-free scenes.
std::vector<SceneSpec> clean_suite(int count, std::uint64_t seed);
/// Scenes whose maximum trace slope is at least kSharpSlope px/px.
std::vector<SceneSpec> sharp_peak_specs(int count, std::uint64_t seed);
std::vector<std::pair<RasterImage, GroundTruth>> sharp_peak_suite(std::uint64_t seed, int count = 20);

inline constexpr double kSharpSlope = 15.0;

/// Largest |y[i+1] - y[i]| over all lines.
double max_slope(const GroundTruth& gt);

std::string scene_id(int index);

}  // namespace plotdigit::synth
