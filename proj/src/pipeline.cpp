#include "plotdigit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "plotdigit/errors.hpp"
#include "plotdigit/image_io.hpp"
#include "plotdigit/json_io.hpp"

namespace plotdigit {

namespace fs = std::filesystem;

AxisBand axis_band(const GrayImage& g, const BBox& region) {
  const Mask dark = axes::dark_pixel_map(g);
  AxisBand band;
  auto column_dark = [&](int x) {
    int n = 0;
    for (int y = region.y0; y < region.y1; ++y) n += dark(y, x);
    return 2 * n > region.height();
  };
  auto row_dark = [&](int y) {
    int n = 0;
    for (int x = region.x0; x < region.x1; ++x) n += dark(y, x);
    return 2 * n > region.width();
  };
  while (band.left < region.width() / 2 && column_dark(region.x0 + band.left)) ++band.left;
  while (band.bottom < region.height() / 2 && row_dark(region.y1 - 1 - band.bottom)) ++band.bottom;
  return band;
}

namespace {

std::optional<Calibration> try_calibrate(const RasterImage& img, const GrayImage& gray,
                                         const axes::AxisPair& axes_pair, ticks::Recognizer& recognizer) {
  try {
    const auto marks = ticks::detect_tick_marks(gray, axes_pair);
    auto boxes = ticks::recognize(ticks::detect_text_boxes(img, axes_pair), img, recognizer);
    const auto cal = ticks::calibrate(ticks::associate(marks, boxes));
    return Calibration{cal.a, cal.b, cal.rms_residual};
  } catch (const InsufficientTicks&) {
  } catch (const NonMonotonic&) {
  } catch (const RecognizerUnavailable&) {
  }
  return std::nullopt;
}

}  // namespace

ExtractionResult extract_image(const RasterImage& img, const std::string& image_id, const PipelineConfig& config,
                               ticks::Recognizer& recognizer, const std::optional<segment::ProbabilityMap>& probmap) {
  ExtractionResult r;
  r.image = image_id;

  const GrayImage gray = to_grayscale(img);
  const auto segments = axes::detect_line_segments(gray, config.axes);
  BBox coarse;
  if (config.coarse_box) {
    coarse = *config.coarse_box;
    if (!coarse.valid() || !coarse.within(img.width(), img.height()))
      throw NoAxesFound("coarse box outside the image");
  } else {
    coarse = axes::propose_plot_region(gray, segments, config.axes);
  }
  const axes::Refinement ref = axes::refine_box(coarse, segments, config.axes);
  r.region = ref.box;
  r.origin = ref.axes.origin;
  if (ref.left_flagged) r.warnings.emplace_back(kLeftEdgeUnrefined);
  if (ref.bottom_flagged) r.warnings.emplace_back(kBottomEdgeUnrefined);

  r.calibration = try_calibrate(img, gray, ref.axes, recognizer);
  if (!r.calibration) r.warnings.emplace_back(kCalibrationUnavailable);

  // Trace inside the axes: the axis strokes would otherwise read as lines.
  const AxisBand band = axis_band(gray, r.region);
  BBox inner = r.region;
  inner.x0 += band.left > 0 ? band.left + 1 : 0;
  inner.y1 -= band.bottom > 0 ? band.bottom + 1 : 0;
  if (!inner.valid()) throw EmptyMask("plot region has no interior");

  segment::ProbabilityMap prob;
  if (probmap) {
    if (probmap->width() != r.region.width() || probmap->height() != r.region.height())
      throw DimensionMismatch("probability map is " + std::to_string(probmap->width()) + "x" +
                              std::to_string(probmap->height()) + ", plot region is " +
                              std::to_string(r.region.width()) + "x" + std::to_string(r.region.height()));
    prob.values = probmap->values.block(inner.y0 - r.region.y0, inner.x0 - r.region.x0, inner.height(), inner.width());
  } else {
    prob = segment::classical_segment(img.crop(inner), config.segmentation);
  }

  const trace::TraceBundle bundle = trace::extract_lines(img.crop(inner), prob, config.trace, config.line_count);

  const int offset = inner.x0 - r.region.x0;
  for (const auto& t : bundle.traces) {
    LineResult line;
    line.id = t.id;
    line.color = t.color;
    for (int i = 0; i < r.region.width(); ++i) {
      const int c = std::clamp(i - offset, 0, bundle.width - 1);
      const double px = r.region.x0 + i;
      const double x = r.calibration ? r.calibration->a * px + r.calibration->b : px;
      line.points.emplace_back(x, inner.y0 + t.y[c]);
    }
    if (r.calibration && r.calibration->a < 0) std::reverse(line.points.begin(), line.points.end());
    r.lines.push_back(std::move(line));
  }
  return r;
}

std::vector<eval::Series> to_series(const ExtractionResult& r) {
  std::vector<eval::Series> out;
  for (const auto& l : r.lines) {
    eval::Series s;
    s.id = l.id;
    s.x0 = r.region.x0;
    s.y.resize(static_cast<Eigen::Index>(l.points.size()));
    const bool reversed = r.calibration && r.calibration->a < 0;
    for (std::size_t i = 0; i < l.points.size(); ++i)
      s.y[Eigen::Index(i)] = l.points[reversed ? l.points.size() - 1 - i : i].y();
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_csv(const ExtractionResult& r) {
  std::ostringstream out;
  out << (r.calibration ? "x" : "x_px");
  for (const auto& l : r.lines) out << ",line_" << l.id;
  out << "\n";
  const std::size_t n = r.lines.empty() ? 0 : r.lines.front().points.size();
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.6g", r.lines.front().points[i].x());
    out << buf;
    for (const auto& l : r.lines) {
      std::snprintf(buf, sizeof buf, ",%.3f", l.points[i].y());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

RasterImage render_overlay(const RasterImage& img, const ExtractionResult& r) {
  RasterImage out = img;
  const auto series = to_series(r);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    int prev = -1;
    for (Eigen::Index i = 0; i < s.y.size(); ++i) {
      const int x = s.x0 + static_cast<int>(i);
      const int y = static_cast<int>(std::lround(s.y[i]));
      const int lo = prev < 0 ? y : std::min(prev, y), hi = prev < 0 ? y : std::max(prev, y);
      for (int yy = lo; yy <= hi; ++yy)
        if (x >= 0 && x < out.width() && yy >= 0 && yy < out.height()) out.set(x, yy, r.lines[k].color);
      prev = y;
    }
  }
  return out;
}

namespace {

void write_outputs(const ExtractionResult& r, const RasterImage& img, const fs::path& out_dir,
                   const PipelineConfig& config, const std::string& stem) {
  if (config.format != OutputFormat::csv)
    json_io::write_text(out_dir / (stem + ".json"), json_io::dump(json_io::to_json(r)));
  if (config.format != OutputFormat::json) json_io::write_text(out_dir / (stem + ".csv"), to_csv(r));
  if (config.overlay) io::write_png(out_dir / (stem + "_overlay.png"), render_overlay(img, r));
}

std::optional<segment::ProbabilityMap> probmap_for(const PipelineConfig& config, const fs::path& input) {
  if (!config.probmap) return std::nullopt;
  const fs::path path = fs::is_directory(*config.probmap) ? *config.probmap / (input.stem().string() + ".png")
                                                          : *config.probmap;
  const Mask raw = io::read_gray_png(path);
  return segment::ProbabilityMap{raw.cast<double>() / 255.0};
}

}  // namespace

BatchSummary run_batch(const std::vector<fs::path>& inputs, const fs::path& out_dir, const PipelineConfig& config) {
  fs::create_directories(out_dir);
  std::vector<std::optional<std::string>> errors(inputs.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    std::unique_ptr<ticks::Recognizer> recognizer;
    if (config.recognizer_command.empty())
      recognizer = std::make_unique<ticks::BuiltinRecognizer>();
    else
      recognizer = std::make_unique<ticks::ExternalRecognizer>(config.recognizer_command);
    for (std::size_t i; (i = next++) < inputs.size();) {
      try {
        const RasterImage img = io::read_image(inputs[i]);
        const std::string stem = inputs[i].stem().string();
        const ExtractionResult r = extract_image(img, stem, config, *recognizer, probmap_for(config, inputs[i]));
        write_outputs(r, img, out_dir, config, stem);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };

  const int jobs = std::clamp<int>(config.jobs, 1, std::max<int>(1, static_cast<int>(inputs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  BatchSummary summary;
  json_io::Json failures = json_io::Json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!errors[i]) {
      ++summary.succeeded;
      continue;
    }
    summary.failures.push_back({inputs[i].string(), *errors[i]});
    failures.push_back(json_io::Json{{"input", inputs[i].string()}, {"error", *errors[i]}});
  }
  if (!summary.failures.empty()) json_io::write_text(out_dir / "failures.json", json_io::dump(failures));
  return summary;
}

EvaluationReport evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir, const std::vector<double>& eps_list) {
  auto list_json = [](const fs::path& dir) {
    std::map<std::string, fs::path> out;
    if (!fs::is_directory(dir)) throw ParseFailure("not a directory: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file() || e.path().extension() != ".json") continue;
      const std::string stem = e.path().stem().string();
      if (stem == "failures" || stem == "report") continue;
      out[stem] = e.path();
    }
    return out;
  };
  const auto preds = list_json(pred_dir);
  const auto gts = list_json(gt_dir);

  EvaluationReport report;
  std::vector<eval::ImageLines> images;
  std::vector<Eigen::Vector2d> pred_origins, gt_origins;
  for (const auto& [id, gt_path] : gts) {
    const auto it = preds.find(id);
    if (it == preds.end()) {
      report.missing_pred.push_back(id);
      continue;
    }
    const synth::GroundTruth gt = json_io::ground_truth_from_json(json_io::read_json(gt_path));
    const ExtractionResult pred = json_io::extraction_from_json(json_io::read_json(it->second));
    eval::ImageLines lines;
    lines.preds = to_series(pred);
    for (std::size_t k = 0; k < gt.lines.size(); ++k)
      lines.gts.push_back(eval::Series{static_cast<int>(k), gt.region.x0, gt.lines[k]});
    images.push_back(std::move(lines));
    pred_origins.push_back(pred.origin);
    gt_origins.push_back(gt.origin);
    report.images.push_back(id);
  }
  for (const auto& [id, path] : preds)
    if (!gts.count(id)) report.missing_gt.push_back(id);

  report.pr = eval::pr_curve(images, eps_list);
  report.misalignment = eval::misalignment(pred_origins, gt_origins);
  return report;
}

}  // namespace plotdigit
