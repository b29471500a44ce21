#pragma once

// Column-sweep plot-line tracer. Each line is a point moving along x whose
// vertical displacement is predicted by optical flow, then validated or
// corrected by foreground evidence (semantic step) and by color consistency
// (color step).

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "plotdigit/raster.hpp"
#include "plotdigit/segment.hpp"

namespace plotdigit::trace {

struct TraceParams {
  double delta_s = 3;       ///< px; flow is kept when foreground lies closer than this
  double delta_c = 30;      ///< RGB L2; flow is kept when a pixel this close in color is near
  int delta = 10;           ///< half-height of the color search window, px
  double v_max = 10;        ///< velocity clamp, px per column
  int stretch_factor = 1;   ///< trace on an x-stretched copy, then subsample
  int ref_color_window = 15;
  double smooth_sigma = 1.0;
  double eps_g = 1.0;
  int velocity_window = 2;  ///< rows above/below averaged when sampling V
  double threshold = 0.5;   ///< probability threshold for candidates
  bool use_semantic = true;
  bool use_color = true;
  /// After the color step, move a line to the center of the foreground run
  /// it lies in when no other line shares that run.
  bool recenter = true;
  /// With the color step on, a line's semantic candidates are restricted
  /// to foreground pixels within delta_c of its reference color.
  bool color_candidates = true;
  /// Candidates farther than this from the flow prediction are ignored, px.
  double search_radius = 20;
  /// Half-height of the band, around each swept trace, in which the three
  /// loss terms are minimized exactly per line afterwards; 0 turns it off.
  int refine_band = 0;
};

enum class Provenance : std::uint8_t { flow, semantic_snap, color_snap };

struct StartPosition {
  int column = 0;
  std::vector<double> ys;  ///< strictly increasing, one per line
};

struct Trace {
  int id = 0;
  Eigen::VectorXd y;  ///< one value per column
  std::vector<Provenance> provenance;
  Rgb color = rgb(0, 0, 0);  ///< reference color at the start position
};

struct TraceBundle {
  std::vector<Trace> traces;
  int width = 0;
};

struct TraceLosses {
  double intensity = 0;
  double smooth = 0;
  double semantic = 0;
  double total = 0;
};

/// Maximal vertical foreground run, rows [begin, end).
struct Run {
  int begin;
  int end;
  double center() const { return 0.5 * (begin + end - 1); }
};

std::vector<Run> column_runs(const segment::SemanticMap& mask, int x);

/// Mode over non-empty columns of the run count; ties go to the larger
/// count. Throws EmptyMask.
int estimate_line_count(const segment::SemanticMap& mask);

/// Among columns with exactly `lines` runs (preferring columns whose two
/// neighbors on each side agree), the one with the least total |gx| over its
/// run pixels; leftmost on ties. Throws NoValidColumn.
StartPosition select_start(const segment::SemanticMap& mask, const GradientField& grad, int lines);

/// Keeps `y_hat` when there are no candidates or one lies closer than
/// delta_s; otherwise returns the nearest candidate (upper one on ties).
double semantic_step(double y_hat, std::span<const double> y_cand, double delta_s);

struct ColorStepResult {
  double y;
  bool snapped;
};

/// Keeps `y_hat` when some pixel of column x within +-delta rows of it is
/// closer than delta_c to `ref`; otherwise moves to the closest-colored row
/// of that window (nearest to y_hat, then upper, on ties).
ColorStepResult color_step(int x, double y_hat, const Rgb& ref, const RasterImage& img, int delta,
                           double delta_c);

/// Mean of the valid velocities in column x within `window` rows of y;
/// zero if none is valid.
double sample_velocity(const VelocityField& vel, int x, double y, int window);

/// Forward and backward sweeps from the start column. Every returned trace
/// covers all columns.
TraceBundle trace_lines(const RasterImage& img, const segment::ProbabilityMap& probmap,
                        const VelocityField& vel, const StartPosition& start, const TraceParams& p);

/// Loss terms of a bundle: intensity constancy between consecutive columns,
/// agreement with the pointwise velocity field, and foreground coverage.
/// Summed over all traces.
TraceLosses trace_losses(const TraceBundle& bundle, const RasterImage& img,
                         const segment::ProbabilityMap& probmap, const VelocityField& vel);

/// Gradient, velocity, line count (unless given), start, trace.
TraceBundle extract_lines(const RasterImage& plot, const segment::ProbabilityMap& probmap,
                          const TraceParams& p, std::optional<int> line_count = std::nullopt);

}  // namespace plotdigit::trace
