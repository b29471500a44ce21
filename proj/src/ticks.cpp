#include "plotdigit/ticks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <regex>

#include "plotdigit/components.hpp"
#include "plotdigit/errors.hpp"
#include "plotdigit/font.hpp"

namespace plotdigit::ticks {

namespace {

constexpr int kMaxTickLength = 10;
constexpr double kTickMergeDistance = 3;
constexpr int kLabelStripHeight = 70;

struct AxisStrip {
  int axis_row;   ///< row of the x axis
  int first_row;  ///< first row below any axis thickness
  int x_lo;
  int x_hi;       ///< inclusive
};

AxisStrip axis_strip(const Mask& dark, const axes::AxisPair& ax) {
  const int h = static_cast<int>(dark.rows()), w = static_cast<int>(dark.cols());
  AxisStrip s;
  s.axis_row = std::clamp(static_cast<int>(std::lround(ax.origin.y())), 0, h - 1);
  s.x_lo = std::clamp(static_cast<int>(std::lround(ax.origin.x())), 0, w - 1);
  s.x_hi = std::clamp(static_cast<int>(std::lround(std::max(ax.x_axis.p0.x(), ax.x_axis.p1.x()))), s.x_lo, w - 1);
  s.first_row = s.axis_row + 1;
  const int span = s.x_hi - s.x_lo + 1;
  while (s.first_row < h) {
    int n = 0;
    for (int x = s.x_lo; x <= s.x_hi; ++x) n += dark(s.first_row, x);
    if (2 * n <= span) break;
    ++s.first_row;
  }
  return s;
}

}  // namespace

std::vector<double> detect_tick_marks(const GrayImage& g, const axes::AxisPair& ax) {
  const Mask dark = axes::dark_pixel_map(g);
  const int h = static_cast<int>(dark.rows());
  const AxisStrip s = axis_strip(dark, ax);
  if (s.first_row >= h) return {};

  std::vector<int> columns;
  for (int x = s.x_lo; x <= s.x_hi; ++x) {
    int len = 0;
    while (s.first_row + len < h && dark(s.first_row + len, x)) ++len;
    if (len >= 2 && len < kMaxTickLength) columns.push_back(x);
  }

  std::vector<double> ticks;
  std::size_t i = 0;
  while (i < columns.size()) {
    std::size_t j = i;
    while (j + 1 < columns.size() && columns[j + 1] - columns[j] <= kTickMergeDistance) ++j;
    double sum = 0;
    for (std::size_t k = i; k <= j; ++k) sum += columns[k];
    ticks.push_back(sum / double(j - i + 1));
    i = j + 1;
  }
  return ticks;
}

std::vector<TextBox> detect_text_boxes(const RasterImage& img, const axes::AxisPair& ax) {
  const GrayImage g = to_grayscale(img);
  const Mask dark = axes::dark_pixel_map(g);
  const int h = static_cast<int>(dark.rows()), w = static_cast<int>(dark.cols());
  const AxisStrip s = axis_strip(dark, ax);
  if (s.first_row >= h) return {};

  const int extend = (s.x_hi - s.x_lo + 1) / 10;
  const BBox strip{std::max(0, s.x_lo - extend), s.first_row, std::min(w, s.x_hi + extend + 1),
                   std::min(h, s.first_row + kLabelStripHeight)};
  const Mask sub = dark.block(strip.y0, strip.x0, strip.height(), strip.width());
  const ComponentLabels cl = label_components(sub);

  std::vector<Component> glyphs;
  for (const auto& c : cl.components)
    if (c.bbox.y0 > 0) glyphs.push_back(c);  // components touching the first row hang off the axis
  std::sort(glyphs.begin(), glyphs.end(), [](const Component& a, const Component& b) {
    return a.bbox.x0 != b.bbox.x0 ? a.bbox.x0 < b.bbox.x0 : a.bbox.y0 < b.bbox.y0;
  });

  std::vector<TextBox> words;
  for (const auto& c : glyphs) {
    BBox b = c.bbox;
    b.x0 += strip.x0;
    b.x1 += strip.x0;
    b.y0 += strip.y0;
    b.y1 += strip.y0;
    if (!words.empty()) {
      BBox& cur = words.back().bbox;
      const int gap = b.x0 - cur.x1;
      const int glyph_height = std::max(cur.height(), b.height());
      const bool overlaps_vertically = b.y0 < cur.y1 && cur.y0 < b.y1;
      if (gap <= glyph_height && overlaps_vertically) {
        cur.x0 = std::min(cur.x0, b.x0);
        cur.y0 = std::min(cur.y0, b.y0);
        cur.x1 = std::max(cur.x1, b.x1);
        cur.y1 = std::max(cur.y1, b.y1);
        continue;
      }
    }
    words.push_back(TextBox{b, {}, 0});
  }
  return words;
}

namespace {

struct GlyphTemplate {
  char c;
  font::Glyph bits;
  int col_lo, col_hi;  ///< inked column span
};

const std::vector<GlyphTemplate>& templates() {
  static const std::vector<GlyphTemplate> t = [] {
    std::vector<GlyphTemplate> out;
    for (char c : font::kCharset) {
      const auto g = *font::glyph(c);
      int lo = font::kGlyphWidth, hi = -1;
      for (int col = 0; col < font::kGlyphWidth; ++col)
        for (int row = 0; row < font::kGlyphHeight; ++row)
          if (font::glyph_bit(g, col, row)) {
            lo = std::min(lo, col);
            hi = std::max(hi, col);
          }
      out.push_back({c, g, lo, hi});
    }
    return out;
  }();
  return t;
}

constexpr int kMaxGlyphMismatches = 6;

}  // namespace

TextBox BuiltinRecognizer::recognize_one(TextBox box, const Mask& dark) const {
  box.text.clear();
  box.confidence = 0;
  const BBox& b = box.bbox;
  const int scale = static_cast<int>(std::lround(b.height() / double(font::kGlyphHeight)));
  if (scale < 1 || std::abs(b.height() - scale * font::kGlyphHeight) > std::max(1, scale / 2)) return box;

  // Split the word into glyphs on empty columns.
  std::vector<std::pair<int, int>> spans;
  int start = -1;
  for (int x = b.x0; x <= b.x1; ++x) {
    bool ink = false;
    if (x < b.x1)
      for (int y = b.y0; y < b.y1 && !ink; ++y) ink = dark(y, x) != 0;
    if (ink && start < 0) start = x;
    if (!ink && start >= 0) {
      spans.emplace_back(start, x);
      start = -1;
    }
  }

  std::string text;
  double confidence_sum = 0;
  for (const auto& [x0, x1] : spans) {
    int best_mismatch = std::numeric_limits<int>::max();
    char best = 0;
    for (const auto& t : templates()) {
      const int ink_width = (t.col_hi - t.col_lo + 1) * scale;
      if (std::abs((x1 - x0) - ink_width) > scale) continue;
      const int cell_x = x0 - t.col_lo * scale;
      int mismatch = 0;
      for (int row = 0; row < font::kGlyphHeight; ++row)
        for (int col = 0; col < font::kGlyphWidth; ++col) {
          int on = 0, n = 0;
          for (int dy = 0; dy < scale; ++dy)
            for (int dx = 0; dx < scale; ++dx) {
              const int px = cell_x + col * scale + dx, py = b.y0 + row * scale + dy;
              if (px < 0 || py < 0 || px >= dark.cols() || py >= dark.rows()) continue;
              on += dark(py, px);
              ++n;
            }
          const bool bit = n > 0 && 2 * on >= n;
          mismatch += bit != font::glyph_bit(t.bits, col, row);
        }
      if (mismatch < best_mismatch) {
        best_mismatch = mismatch;
        best = t.c;
      }
    }
    if (best == 0 || best_mismatch > kMaxGlyphMismatches) return box;
    text += best;
    confidence_sum += 1.0 - best_mismatch / double(font::kGlyphWidth * font::kGlyphHeight);
  }
  if (text.empty()) return box;
  box.text = std::move(text);
  box.confidence = confidence_sum / double(box.text.size());
  return box;
}

std::vector<TextBox> BuiltinRecognizer::recognize(std::vector<TextBox> boxes, const RasterImage& img) {
  const Mask dark = axes::dark_pixel_map(to_grayscale(img));
  for (auto& b : boxes) b = recognize_one(std::move(b), dark);
  return boxes;
}

std::vector<TextBox> recognize(std::vector<TextBox> boxes, const RasterImage& img, Recognizer& recognizer) {
  return recognizer.recognize(std::move(boxes), img);
}

std::optional<double> parse_numeric(std::string_view text) {
  std::string s(text);
  // Typographic minus sign from OCR output.
  for (std::size_t pos; (pos = s.find("\xE2\x88\x92")) != std::string::npos;) s.replace(pos, 3, "-");
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  s = s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);

  static const std::regex kNumber(R"(^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$)");
  if (!std::regex_match(s, kNumber)) return std::nullopt;
  const char* begin = s.data() + (s[0] == '+' ? 1 : 0);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::vector<TickLabel> associate(const std::vector<double>& tick_px, const std::vector<TextBox>& boxes) {
  struct Numeric {
    double center;
    double value;
    int tick = -1;
    double dist = 0;
  };
  std::vector<Numeric> labels;
  for (const auto& b : boxes) {
    if (b.text.empty()) continue;
    if (auto v = parse_numeric(b.text)) labels.push_back({0.5 * (b.bbox.x0 + b.bbox.x1 - 1), *v});
  }
  for (auto& l : labels)
    for (std::size_t t = 0; t < tick_px.size(); ++t) {
      const double d = std::abs(tick_px[t] - l.center);
      if (l.tick < 0 || d < l.dist) {
        l.tick = static_cast<int>(t);
        l.dist = d;
      }
    }
  std::vector<TickLabel> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    bool won = l.tick >= 0;
    for (std::size_t j = 0; j < labels.size() && won; ++j)
      if (j != i && labels[j].tick == l.tick &&
          (labels[j].dist < l.dist || (labels[j].dist == l.dist && j < i)))
        won = false;
    out.push_back({won ? tick_px[l.tick] : l.center, l.value});
  }
  return out;
}

namespace {

AxisCalibration fit(const std::vector<TickLabel>& ticks) {
  const double n = double(ticks.size());
  double mx = 0, my = 0;
  for (const auto& t : ticks) {
    mx += t.anchor_px;
    my += t.value;
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& t : ticks) {
    sxx += (t.anchor_px - mx) * (t.anchor_px - mx);
    sxy += (t.anchor_px - mx) * (t.value - my);
  }
  AxisCalibration c;
  c.a = sxy / sxx;
  c.b = my - c.a * mx;
  double ss = 0;
  for (const auto& t : ticks) {
    const double r = t.value - c.value(t.anchor_px);
    ss += r * r;
  }
  c.rms_residual = std::sqrt(ss / n);
  return c;
}

std::size_t distinct_anchors(std::vector<TickLabel> ticks) {
  std::sort(ticks.begin(), ticks.end(), [](auto& a, auto& b) { return a.anchor_px < b.anchor_px; });
  std::size_t n = 0;
  for (std::size_t i = 0; i < ticks.size(); ++i)
    if (i == 0 || ticks[i].anchor_px != ticks[i - 1].anchor_px) ++n;
  return n;
}

}  // namespace

AxisCalibration calibrate(std::vector<TickLabel> ticks) {
  if (distinct_anchors(ticks) < 2) throw InsufficientTicks("need at least two ticks with distinct positions");
  std::sort(ticks.begin(), ticks.end(), [](const TickLabel& a, const TickLabel& b) {
    return a.anchor_px != b.anchor_px ? a.anchor_px < b.anchor_px : a.value < b.value;
  });

  AxisCalibration cal = fit(ticks);
  if (ticks.size() >= 4 && cal.rms_residual > 0) {
    std::size_t best = ticks.size();
    double best_rms = cal.rms_residual;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
      std::vector<TickLabel> rest = ticks;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      if (distinct_anchors(rest) < 2) continue;
      const double rms = fit(rest).rms_residual;
      if (rms < best_rms) {
        best_rms = rms;
        best = i;
      }
    }
    if (best < ticks.size() && best_rms * 10 <= cal.rms_residual) {
      ticks.erase(ticks.begin() + static_cast<std::ptrdiff_t>(best));
      cal = fit(ticks);
      cal.outlier_dropped = true;
    }
  }

  if (!(cal.a != 0) || !std::isfinite(cal.a)) throw NonMonotonic("degenerate calibration slope");
  for (std::size_t i = 1; i < ticks.size(); ++i) {
    if (ticks[i].anchor_px == ticks[i - 1].anchor_px) continue;
    const double dv = ticks[i].value - ticks[i - 1].value;
    if (dv == 0 || (dv > 0) != (cal.a > 0))
      throw NonMonotonic("tick values are not monotonic in pixel order");
  }
  return cal;
}

}  // namespace plotdigit::ticks
