#pragma once

// Image -> numeric series orchestration, batch running, evaluation over
// directories.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "plotdigit/axes.hpp"
#include "plotdigit/eval.hpp"
#include "plotdigit/geometry.hpp"
#include "plotdigit/raster.hpp"
#include "plotdigit/segment.hpp"
#include "plotdigit/ticks.hpp"
#include "plotdigit/trace.hpp"

namespace plotdigit {

struct LineResult {
  int id = 0;
  Rgb color = rgb(0, 0, 0);
  std::vector<Eigen::Vector2d> points;  ///< (x, y px); x in data units when calibrated
};

struct Calibration {
  double a = 1;
  double b = 0;
  double rms = 0;
};

struct ExtractionResult {
  std::string image;
  BBox region;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  std::optional<Calibration> calibration;
  std::vector<LineResult> lines;
  std::vector<std::string> warnings;
};

inline constexpr const char* kCalibrationUnavailable = "calibration-unavailable";
inline constexpr const char* kLeftEdgeUnrefined = "left-edge-unrefined";
inline constexpr const char* kBottomEdgeUnrefined = "bottom-edge-unrefined";

enum class OutputFormat { json, csv, both };

struct PipelineConfig {
  trace::TraceParams trace;
  axes::AxisParams axes;
  segment::ClassicalParams segmentation;
  /// Probability map PNG sized like the refined plot region. A directory
  /// means <dir>/<image stem>.png per input.
  std::optional<std::filesystem::path> probmap;
  /// Coarse box replacing the built-in region proposal; refinement still runs.
  std::optional<BBox> coarse_box;
  std::string recognizer_command;  ///< empty: built-in template matcher
  std::optional<int> line_count;
  OutputFormat format = OutputFormat::json;
  bool overlay = false;
  int jobs = 1;
};

/// Rows/columns of axis stroke at the region's bottom/left edges.
struct AxisBand {
  int left = 0;
  int bottom = 0;
};
AxisBand axis_band(const GrayImage& g, const BBox& region);

/// Runs the full pipeline on one decoded image. Calibration failures only
/// add a warning; NoAxesFound, EmptyMask, NoValidColumn and probability-map
/// errors propagate.
ExtractionResult extract_image(const RasterImage& img, const std::string& image_id, const PipelineConfig& config,
                               ticks::Recognizer& recognizer,
                               const std::optional<segment::ProbabilityMap>& probmap = std::nullopt);

/// Pixel-column series of a result, as needed by the evaluator: point i sits
/// at column region.x0 + i.
std::vector<eval::Series> to_series(const ExtractionResult& r);

/// Wide CSV: x, then one y column per line.
std::string to_csv(const ExtractionResult& r);

/// Traces drawn over the input in their line colors.
RasterImage render_overlay(const RasterImage& img, const ExtractionResult& r);

struct BatchFailure {
  std::string input;
  std::string error;
};

struct BatchSummary {
  int succeeded = 0;
  std::vector<BatchFailure> failures;

  /// 0 all succeeded, 2 partial failure.
  int exit_code() const { return failures.empty() ? 0 : 2; }
};

/// Processes every input on `config.jobs` threads, writing <stem>.json /
/// <stem>.csv / <stem>_overlay.png into out_dir and failures.json when any
/// input failed.
BatchSummary run_batch(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out_dir,
                       const PipelineConfig& config);

struct EvaluationReport {
  std::vector<eval::PRPoint> pr;
  eval::MisalignmentReport misalignment;
  std::vector<std::string> images;           ///< ids present in both dirs
  std::vector<std::string> missing_pred;     ///< ground truth without prediction
  std::vector<std::string> missing_gt;       ///< prediction without ground truth
};

EvaluationReport evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                               const std::vector<double>& eps_list);

}  // namespace plotdigit
