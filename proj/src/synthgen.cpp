#include "plotdigit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "plotdigit/errors.hpp"
#include "plotdigit/font.hpp"

namespace plotdigit::synth {

namespace {

// tab10 without gray, plus black.
const Rgb kPalette[] = {
    rgb(31, 119, 180), rgb(255, 127, 14), rgb(44, 160, 44),  rgb(214, 39, 40),
    rgb(148, 103, 189), rgb(140, 86, 75), rgb(227, 119, 194), rgb(23, 190, 207),
    rgb(188, 189, 34),  rgb(0, 0, 0),
};

constexpr double kMinColorSeparation = 30.0;

double peak_value(const PeakSpec& p, double x) {
  const double u = (x - p.center) / p.width;
  return p.shape == PeakShape::gaussian ? std::exp(-0.5 * u * u) : 1.0 / (1.0 + u * u);
}

double distance_to_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double cx = ax + t * dx - px, cy = ay + t * dy - py;
  return std::sqrt(cx * cx + cy * cy);
}

/// Double-precision RGB canvas used before quantization.
struct Canvas {
  Plane<double> c[3];

  Canvas(int w, int h) {
    for (auto& p : c) p = Plane<double>::Constant(h, w, 255.0);
  }
  int width() const { return static_cast<int>(c[0].cols()); }
  int height() const { return static_cast<int>(c[0].rows()); }

  void blend(int x, int y, const Rgb& color, double alpha) {
    if (x < 0 || y < 0 || x >= width() || y >= height() || alpha <= 0) return;
    alpha = std::min(alpha, 1.0);
    for (int k = 0; k < 3; ++k) c[k](y, x) = c[k](y, x) * (1 - alpha) + color[k] * alpha;
  }
  void fill_rect(int x0, int y0, int x1, int y1, const Rgb& color) {
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) blend(x, y, color, 1.0);
  }
};

void draw_curve(Canvas& canvas, const SceneSpec& spec, const LineSpec& line) {
  constexpr int kSubsteps = 4;
  const BBox region = spec.region();
  const int n = (spec.plot_width - 1) * kSubsteps + 1;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    const double px = region.x0 + double(i) / kSubsteps;
    double y = spec.origin_y - line.offset - line.drift * (px - region.x0) / std::max(1, spec.plot_width - 1);
    const double xd = spec.data_x(px);
    for (const auto& p : line.peaks) y -= p.amplitude * peak_value(p, xd);
    xs[i] = px;
    ys[i] = y;
  }
  const double half = line.stroke_width / 2;
  const int pad = static_cast<int>(std::ceil(half + 1));
  Plane<double> cover = Plane<double>::Zero(canvas.height(), canvas.width());
  for (int i = 0; i + 1 < n; ++i) {
    const int bx0 = static_cast<int>(std::floor(std::min(xs[i], xs[i + 1]))) - pad;
    const int bx1 = static_cast<int>(std::ceil(std::max(xs[i], xs[i + 1]))) + pad;
    const int by0 = static_cast<int>(std::floor(std::min(ys[i], ys[i + 1]))) - pad;
    const int by1 = static_cast<int>(std::ceil(std::max(ys[i], ys[i + 1]))) + pad;
    for (int y = std::max(by0, 0); y <= std::min(by1, canvas.height() - 1); ++y)
      for (int x = std::max(bx0, 0); x <= std::min(bx1, canvas.width() - 1); ++x) {
        const double d = distance_to_segment(x, y, xs[i], ys[i], xs[i + 1], ys[i + 1]);
        const double a = std::clamp(half + 0.5 - d, 0.0, 1.0);
        if (a > cover(y, x)) cover(y, x) = a;
      }
  }
  for (int y = 0; y < canvas.height(); ++y)
    for (int x = 0; x < canvas.width(); ++x)
      if (cover(y, x) > 0) canvas.blend(x, y, line.color, cover(y, x));
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::string SceneSpec::tick_label(int k) const {
  const double v = tick_value0 + k * tick_step;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", tick_decimals, v);
  std::string s = buf;
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    bool all_zero = s.find_first_not_of("-0.") == std::string::npos;
    if (all_zero) s.erase(0, 1);
  }
  return s;
}

std::string scene_id(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%04d", index);
  return buf;
}

Eigen::VectorXd line_profile(const SceneSpec& spec, const LineSpec& line) {
  const BBox region = spec.region();
  Eigen::VectorXd y(spec.plot_width);
  for (int i = 0; i < spec.plot_width; ++i) {
    const double px = region.x0 + i;
    double v = spec.origin_y - line.offset - line.drift * i / std::max(1, spec.plot_width - 1);
    const double xd = spec.data_x(px);
    for (const auto& p : line.peaks) v -= p.amplitude * peak_value(p, xd);
    y[i] = v;
  }
  return y;
}

void validate(const SceneSpec& spec) {
  const int m = static_cast<int>(spec.lines.size());
  if (m < 1 || m > 10) throw InvalidScene("line count must be in [1, 10]");
  if (spec.width < 1 || spec.height < 1) throw InvalidScene("empty canvas");
  if (spec.plot_width < 2 || spec.plot_height < 2) throw InvalidScene("plot region too small");
  if (spec.axis_width < 1) throw InvalidScene("axis_width < 1");
  const BBox region = spec.region();
  if (!region.within(spec.width, spec.height)) throw InvalidScene("plot region exits the canvas");
  if (spec.noise_sigma < 0 || spec.blur_sigma < 0) throw InvalidScene("negative noise/blur");
  if (spec.tick_count < 0 || (spec.tick_count > 0 && spec.tick_spacing <= 0))
    throw InvalidScene("bad tick layout");
  if (spec.tick_count > 0 &&
      (spec.tick_px(0) < region.x0 || spec.tick_px(spec.tick_count - 1) >= region.x1))
    throw InvalidScene("ticks outside the x axis");

  for (int a = 0; a < m; ++a) {
    const auto& line = spec.lines[a];
    if (!(line.stroke_width > 0)) throw InvalidScene("stroke_width must be positive");
    for (const auto& p : line.peaks)
      if (!(p.amplitude > 0) || !(p.width > 0)) throw InvalidScene("peak amplitude and width must be positive");
    if (!spec.allow_similar_colors)
      for (int b = 0; b < a; ++b)
        if (color_distance(line.color, spec.lines[b].color) < kMinColorSeparation)
          throw InvalidScene("line colors closer than 30 in RGB");
    const Eigen::VectorXd y = line_profile(spec, line);
    const double half = line.stroke_width / 2;
    const double top = region.y0 + 1;
    const double bottom = spec.origin_y - spec.axis_width;
    if (y.minCoeff() - half < top || y.maxCoeff() + half > bottom)
      throw InvalidScene("curve exits the plot region");
  }
}

std::pair<RasterImage, GroundTruth> generate_scene(const SceneSpec& spec) {
  validate(spec);
  const BBox region = spec.region();
  Canvas canvas(spec.width, spec.height);

  if (spec.draw_gridlines)
    for (int k = 0; k < spec.tick_count; ++k)
      canvas.fill_rect(spec.tick_px(k), region.y0, spec.tick_px(k) + 1, spec.origin_y, spec.grid_color);

  for (const auto& line : spec.lines) draw_curve(canvas, spec, line);

  // Axes grow right/up from the origin so the origin is the outermost pixel.
  canvas.fill_rect(spec.origin_x, region.y0, spec.origin_x + spec.axis_width, spec.origin_y + 1,
                   spec.axis_color);
  canvas.fill_rect(spec.origin_x, spec.origin_y - spec.axis_width + 1, region.x1, spec.origin_y + 1,
                   spec.axis_color);

  RasterImage labels(spec.width, spec.height);
  for (int k = 0; k < spec.tick_count; ++k) {
    const int px = spec.tick_px(k);
    if (spec.draw_ticks)
      canvas.fill_rect(px, spec.origin_y + 1, px + 1, spec.origin_y + 1 + spec.tick_length, spec.axis_color);
    if (spec.draw_labels) {
      const std::string text = spec.tick_label(k);
      const int w = font::text_width(text, spec.label_scale);
      const int top = spec.origin_y + 1 + spec.tick_length + spec.label_gap;
      font::draw_text(labels, px - w / 2, top, text, spec.label_scale, spec.axis_color);
    }
  }
  if (spec.draw_labels)
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        if (labels.at(x, y) != rgb(255, 255, 255)) canvas.blend(x, y, labels.at(x, y), 1.0);

  for (auto& p : canvas.c) p = gaussian_blur(p, spec.blur_sigma);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
  RasterImage img(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      Rgb c;
      for (int k = 0; k < 3; ++k) {
        double v = canvas.c[k](y, x);
        if (spec.noise_sigma > 0) v += noise(rng);
        c[k] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
      }
      img.set(x, y, c);
    }

  GroundTruth gt;
  gt.region = region;
  gt.origin = Eigen::Vector2d(spec.origin_x, spec.origin_y);
  for (int k = 0; k < spec.tick_count; ++k)
    gt.ticks.emplace_back(spec.tick_px(k), spec.tick_value0 + k * spec.tick_step);
  for (const auto& line : spec.lines) gt.lines.push_back(line_profile(spec, line));
  return {std::move(img), std::move(gt)};
}

SceneSpec random_scene_spec(std::uint64_t seed, const SuiteOptions& opts) {
  std::mt19937_64 rng(splitmix(seed));
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto irange = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };

  SceneSpec s;
  s.seed = splitmix(seed ^ 0xA5A5A5A5ull);
  s.noise_sigma = opts.noise_sigma;
  s.blur_sigma = opts.blur_sigma;
  s.width = irange(440, 560);
  s.height = opts.sharp_peaks ? irange(420, 480) : irange(340, 420);
  s.origin_x = irange(45, 70);
  s.origin_y = s.height - irange(45, 60);
  s.plot_width = s.width - s.origin_x - irange(15, 30);
  const int top = irange(12, 25);
  s.plot_height = s.origin_y - top + 1;
  s.axis_width = uni(0, 1) < 0.25 ? 2 : 1;
  s.label_scale = uni(0, 1) < 0.8 ? 2 : 3;

  struct TickScheme {
    double v0, step;
    int decimals;
  };
  static constexpr TickScheme kSchemes[] = {
      {100, 100, 0}, {8980, 20, 0}, {0, 0.5, 1}, {-10, 5, 0}, {1000, 250, 0}, {200, 400, 0},
  };
  const auto& scheme = kSchemes[irange(0, std::size(kSchemes) - 1)];
  const int max_label_chars = 5;
  const int min_spacing = font::text_width(std::string(max_label_chars, '0'), s.label_scale) + 16;
  s.tick_first = irange(8, 30);
  const int usable = s.plot_width - s.tick_first - 8;
  const int max_count = std::max(2, usable / min_spacing + 1);
  s.tick_count = irange(std::min(4, max_count), std::min(7, max_count));
  s.tick_spacing = usable / std::max(1, s.tick_count - 1);
  s.tick_value0 = scheme.v0;
  s.tick_step = scheme.step;
  s.tick_decimals = scheme.decimals;

  const int m = irange(opts.min_lines, opts.max_lines);
  std::vector<Rgb> palette(std::begin(kPalette), std::end(kPalette));
  std::shuffle(palette.begin(), palette.end(), rng);

  const BBox region = s.region();
  const double inner_top = region.y0 + 10;
  const double inner_bottom = s.origin_y - s.axis_width - 10;
  const double span = inner_bottom - inner_top;
  const double spacing = opts.sharp_peaks ? span / (m + 1.5) : span / (m + 0.5);
  const double data_lo = s.data_x(region.x0), data_hi = s.data_x(region.x1 - 1);
  const double px_to_data = s.tick_step / s.tick_spacing;

  for (int k = 0; k < m; ++k) {
    LineSpec line;
    line.color = palette[k];
    line.stroke_width = uni(1.5, 3.0);
    line.offset = (s.origin_y - inner_bottom) + k * spacing + uni(0, 0.15) * spacing;
    line.drift = uni(-0.2, 0.2) * spacing;
    if (line.offset + std::min(line.drift, 0.0) < s.origin_y - inner_bottom) line.drift = 0;
    const int npeaks = opts.sharp_peaks ? irange(2, 4) : irange(1, 4);
    for (int p = 0; p < npeaks; ++p) {
      PeakSpec peak;
      peak.shape = uni(0, 1) < 0.6 ? PeakShape::gaussian : PeakShape::lorentzian;
      peak.center = data_lo + uni(0.08, 0.92) * (data_hi - data_lo);
      double sigma_px;
      if (opts.sharp_peaks) {
        sigma_px = uni(1.2, 2.5);
        peak.shape = PeakShape::gaussian;
        peak.amplitude = uni(std::max(60.0, 30.0 * sigma_px), 1.6 * spacing);
      } else {
        sigma_px = uni(6, 30);
        peak.amplitude = (uni(0, 1) < 0.2 ? uni(0.85, 1.4) : uni(0.3, 0.85)) * spacing;
      }
      peak.width = sigma_px * std::abs(px_to_data);
      line.peaks.push_back(peak);
    }
    // Shrink peaks until the curve stays inside the region.
    for (int attempt = 0; attempt < 40; ++attempt) {
      const Eigen::VectorXd y = line_profile(s, line);
      if (y.minCoeff() - line.stroke_width / 2 >= inner_top - 8) break;
      for (auto& peak : line.peaks) peak.amplitude *= 0.9;
    }
    s.lines.push_back(std::move(line));
  }
  return s;
}

namespace {

std::vector<SceneSpec> make_suite(int count, std::uint64_t seed, const SuiteOptions& opts) {
  std::vector<SceneSpec> specs;
  specs.reserve(std::max(count, 0));
  for (int i = 0; i < count; ++i) {
    std::uint64_t s = splitmix(seed * 1000003ull + static_cast<std::uint64_t>(i));
    for (;;) {
      SceneSpec spec = random_scene_spec(s, opts);
      try {
        validate(spec);
      } catch (const InvalidScene&) {
        s = splitmix(s);
        continue;
      }
      if (opts.sharp_peaks) {
        GroundTruth gt;
        for (const auto& line : spec.lines) gt.lines.push_back(line_profile(spec, line));
        if (max_slope(gt) < kSharpSlope) {
          s = splitmix(s);
          continue;
        }
      }
      specs.push_back(std::move(spec));
      break;
    }
  }
  return specs;
}

}  // namespace

std::vector<SceneSpec> standard_suite(int count, std::uint64_t seed) {
  return make_suite(count, seed, SuiteOptions{});
}

std::vector<SceneSpec> clean_suite(int count, std::uint64_t seed) {
  SuiteOptions opts;
  opts.noise_sigma = 0;
  opts.blur_sigma = 0;
  return make_suite(count, seed, opts);
}

std::vector<SceneSpec> sharp_peak_specs(int count, std::uint64_t seed) {
  SuiteOptions opts;
  opts.min_lines = 2;
  opts.max_lines = 3;
  opts.sharp_peaks = true;
  return make_suite(count, seed, opts);
}

std::vector<std::pair<RasterImage, GroundTruth>> sharp_peak_suite(std::uint64_t seed, int count) {
  std::vector<std::pair<RasterImage, GroundTruth>> out;
  const auto specs = sharp_peak_specs(count, seed);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto scene = generate_scene(specs[i]);
    scene.second.image = scene_id(static_cast<int>(i));
    out.push_back(std::move(scene));
  }
  return out;
}

double max_slope(const GroundTruth& gt) {
  double best = 0;
  for (const auto& y : gt.lines)
    for (Eigen::Index i = 0; i + 1 < y.size(); ++i) best = std::max(best, std::abs(y[i + 1] - y[i]));
  return best;
}

}  // namespace plotdigit::synth
