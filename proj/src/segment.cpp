#include "plotdigit/segment.hpp"

#include <array>
#include <cmath>

#include "plotdigit/components.hpp"
#include "plotdigit/errors.hpp"
#include "plotdigit/image_io.hpp"

namespace plotdigit::segment {

Rgb background_color(const RasterImage& plot) {
  std::array<std::array<long, 256>, 3> hist{};
  const auto px = plot.pixels();
  for (std::size_t i = 0; i < px.size(); i += 3)
    for (int c = 0; c < 3; ++c) ++hist[c][px[i + c]];
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    int best = 0;
    for (int v = 1; v < 256; ++v)
      if (hist[c][v] > hist[c][best]) best = v;
    out[c] = static_cast<std::uint8_t>(best);
  }
  return out;
}

ProbabilityMap classical_segment(const RasterImage& plot, const ClassicalParams& p) {
  const Rgb bg = background_color(plot);
  const int h = plot.height(), w = plot.width();
  ProbabilityMap m{Plane<double>(h, w)};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = color_distance(plot.at(x, y), bg);
      m.values(y, x) = 1.0 / (1.0 + std::exp(-(d - p.tau) / p.softness));
    }

  if (p.min_component > 1) {
    const Mask fg = (m.values >= 0.5).cast<std::uint8_t>();
    const ComponentLabels cl = label_components(fg);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int id = cl.labels(y, x);
        if (id >= 0 && cl.components[id].area < p.min_component) m.values(y, x) = 0;
      }
  }
  return m;
}

Mask quantize(const ProbabilityMap& m) {
  return (m.values.cwiseMax(0.0).cwiseMin(1.0) * 255.0).round().cast<std::uint8_t>();
}

void save_probability_map(const std::filesystem::path& path, const ProbabilityMap& m) {
  io::write_gray_png(path, quantize(m));
}

ProbabilityMap load_probability_map(const std::filesystem::path& path, Eigen::Index expected_width,
                                    Eigen::Index expected_height) {
  const Mask raw = io::read_gray_png(path);
  if (raw.cols() != expected_width || raw.rows() != expected_height)
    throw DimensionMismatch("probability map " + path.string() + " is " + std::to_string(raw.cols()) + "x" +
                            std::to_string(raw.rows()) + ", expected " + std::to_string(expected_width) +
                            "x" + std::to_string(expected_height));
  return ProbabilityMap{raw.cast<double>() / 255.0};
}

SemanticMap binarize(const ProbabilityMap& m, double threshold) {
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("binarize: threshold must be in (0, 1)");
  return SemanticMap{(m.values >= threshold).cast<std::uint8_t>()};
}

double bce_score(const ProbabilityMap& pred, const SemanticMap& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height())
    throw DimensionMismatch("bce_score: prediction and ground truth differ in size");
  if (pred.values.size() == 0) return 0;
  constexpr double kEps = 1e-7;
  const Plane<double> p = pred.values.cwiseMax(kEps).cwiseMin(1 - kEps);
  const Plane<double> c = gt.mask.cast<double>();
  const Plane<double> loss = -(c * p.log() + (1 - c) * (1 - p).log());
  return loss.mean();
}

}  // namespace plotdigit::segment
