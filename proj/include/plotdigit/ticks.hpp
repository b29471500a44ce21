#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plotdigit/axes.hpp"
#include "plotdigit/geometry.hpp"
#include "plotdigit/raster.hpp"

namespace plotdigit::ticks {

struct TextBox {
  BBox bbox;
  std::string text;
  double confidence = 0;  ///< meaningful only when text is nonempty
};

struct TickLabel {
  double anchor_px = 0;
  double value = 0;
};

/// value(px) = a * px + b, fitted by least squares.
struct AxisCalibration {
  double a = 1;
  double b = 0;
  double rms_residual = 0;
  bool outlier_dropped = false;

  double value(double px) const { return a * px + b; }
  double pixel(double value) const { return (value - b) / a; }
};

/// Centers of short (< 10 px) dark strokes hanging below the x axis,
/// merged within 3 px. Strictly increasing.
std::vector<double> detect_tick_marks(const GrayImage& g, const axes::AxisPair& axes);

/// Word boxes in the strip under the x axis: dark connected components
/// (excluding strokes attached to the axis) merged left to right while the
/// horizontal gap is at most the glyph height.
std::vector<TextBox> detect_text_boxes(const RasterImage& img, const axes::AxisPair& axes);

/// Fills `text` / `confidence` of each box. Per-box failures leave the text
/// empty.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual std::vector<TextBox> recognize(std::vector<TextBox> boxes, const RasterImage& img) = 0;
};

/// Template matching against the built-in 5x7 font.
class BuiltinRecognizer final : public Recognizer {
 public:
  std::vector<TextBox> recognize(std::vector<TextBox> boxes, const RasterImage& img) override;
  TextBox recognize_one(TextBox box, const Mask& dark) const;
};

/// Line-delimited JSON over a child process's stdin/stdout.
///   request:  {"id": int, "png_base64": string}
///   response: {"id": int, "text": string, "confidence": number}
/// Responses may arrive in any order. A box whose response does not arrive
/// within `timeout` of the previous progress is left empty and the child is
/// restarted on the next call. Throws RecognizerUnavailable when the child
/// cannot be started, exits early, or violates the protocol.
/// Not thread-safe; use one instance per worker.
class ExternalRecognizer final : public Recognizer {
 public:
  explicit ExternalRecognizer(std::string command,
                              std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~ExternalRecognizer() override;
  ExternalRecognizer(const ExternalRecognizer&) = delete;
  ExternalRecognizer& operator=(const ExternalRecognizer&) = delete;

  std::vector<TextBox> recognize(std::vector<TextBox> boxes, const RasterImage& img) override;

 private:
  void start();
  void stop();

  std::string command_;
  std::chrono::milliseconds timeout_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string read_buffer_;
};

std::vector<TextBox> recognize(std::vector<TextBox> boxes, const RasterImage& img, Recognizer& recognizer);

/// Optional sign, digits with optional decimal point, optional exponent.
/// Surrounding whitespace is ignored; anything else is rejected.
std::optional<double> parse_numeric(std::string_view text);

/// Each numeric box goes to the nearest tick mark by horizontal center
/// distance (closest label wins a contested mark); otherwise its own center
/// is the anchor.
std::vector<TickLabel> associate(const std::vector<double>& tick_px, const std::vector<TextBox>& boxes);

/// Throws InsufficientTicks (< 2 distinct anchors) or NonMonotonic. With
/// four or more ticks, a single tick whose removal cuts the rms residual by
/// 10x or more is dropped.
AxisCalibration calibrate(std::vector<TickLabel> ticks);

}  // namespace plotdigit::ticks
