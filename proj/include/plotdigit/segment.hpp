#pragma once

#include <filesystem>

#include "plotdigit/raster.hpp"

namespace plotdigit::segment {

/// Foreground evidence in [0, 1] over the plot-region crop.
struct ProbabilityMap {
  Plane<double> values;

  Eigen::Index width() const { return values.cols(); }
  Eigen::Index height() const { return values.rows(); }
  double operator()(Eigen::Index x, Eigen::Index y) const { return values(y, x); }
};

/// Binary foreground mask, 1 = plot-line pixel.
struct SemanticMap {
  Mask mask;

  Eigen::Index width() const { return mask.cols(); }
  Eigen::Index height() const { return mask.rows(); }
  bool operator()(Eigen::Index x, Eigen::Index y) const { return mask(y, x) != 0; }
};

struct ClassicalParams {
  double tau = 40;        ///< color distance at which probability is 0.5
  double softness = 10;   ///< logistic scale
  int min_component = 5;  ///< foreground components smaller than this are removed
};

/// Most frequent value of each channel over the crop.
Rgb background_color(const RasterImage& plot);

/// probability = logistic((||pixel - background|| - tau) / softness), followed
/// by removal of foreground specks.
ProbabilityMap classical_segment(const RasterImage& plot, const ClassicalParams& p = {});

/// Reads an 8-bit grayscale PNG as value / 255. Throws DimensionMismatch or
/// DecodeFailure.
ProbabilityMap load_probability_map(const std::filesystem::path& path, Eigen::Index expected_width,
                                    Eigen::Index expected_height);
/// Quantizes to round(255 * p).
void save_probability_map(const std::filesystem::path& path, const ProbabilityMap& m);
Mask quantize(const ProbabilityMap& m);

/// Foreground iff value >= threshold; threshold must lie in (0, 1).
SemanticMap binarize(const ProbabilityMap& m, double threshold = 0.5);

/// Mean binary cross-entropy with predictions clamped to [1e-7, 1 - 1e-7].
/// Throws DimensionMismatch.
double bce_score(const ProbabilityMap& pred, const SemanticMap& gt);

}  // namespace plotdigit::segment
