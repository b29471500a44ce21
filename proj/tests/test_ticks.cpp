#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "plotdigit/errors.hpp"
#include "plotdigit/font.hpp"
#include "plotdigit/synthgen.hpp"
#include "plotdigit/ticks.hpp"
#include "scenes.hpp"

using namespace plotdigit;
using namespace plotdigit::ticks;

namespace {

struct Fit {
  double a, b, rms;
};

// Closed-form simple linear regression.
Fit least_squares(const std::vector<TickLabel>& t) {
  double mx = 0, mv = 0;
  for (const auto& k : t) {
    mx += k.anchor_px;
    mv += k.value;
  }
  mx /= t.size();
  mv /= t.size();
  double sxy = 0, sxx = 0;
  for (const auto& k : t) {
    sxy += (k.anchor_px - mx) * (k.value - mv);
    sxx += (k.anchor_px - mx) * (k.anchor_px - mx);
  }
  const double a = sxy / sxx, b = mv - a * mx;
  double ssr = 0;
  for (const auto& k : t) ssr += std::pow(k.value - (a * k.anchor_px + b), 2);
  return {a, b, std::sqrt(ssr / t.size())};
}

axes::AxisPair axes_of(const synth::SceneSpec& s) {
  axes::AxisPair p;
  const BBox r = s.region();
  p.x_axis = {{double(r.x0), double(s.origin_y)}, {double(r.x1 - 1), double(s.origin_y)}};
  p.y_axis = {{double(s.origin_x), double(r.y0)}, {double(s.origin_x), double(s.origin_y)}};
  p.origin = {double(s.origin_x), double(s.origin_y)};
  return p;
}

synth::SceneSpec three_ticks() {
  auto s = scenes::flat_lines({60});
  s.tick_first = 50;
  s.tick_spacing = 100;
  s.tick_count = 3;
  return s;
}

}  // namespace

TEST_CASE("parse_numeric") {
  CHECK(parse_numeric("532") == 532.0);
  CHECK(parse_numeric("1.5e3") == 1500.0);
  CHECK(parse_numeric(" -2.25 ") == -2.25);
  CHECK(parse_numeric("+7") == 7.0);
  CHECK(parse_numeric(".5") == 0.5);
  CHECK(parse_numeric("3E-2") == doctest::Approx(0.03));
  for (const char* bad : {"eV", "", "1,000", "1.2.3", "e5", "12a", "--1", "Fe", "1e"}) CHECK_FALSE(parse_numeric(bad));
}

TEST_CASE("calibrate") {
  auto c = calibrate({{100, 200}, {300, 400}});
  CHECK(c.a == doctest::Approx(1.0));
  CHECK(c.b == doctest::Approx(100.0));
  CHECK(c.value(200) == doctest::Approx(300.0));

  const std::vector<TickLabel> t{{100, 200}, {200, 300}, {300, 401}};
  const Fit f = least_squares(t);
  c = calibrate(t);
  CHECK(c.a == doctest::Approx(1.005).epsilon(1e-12));
  CHECK(c.b == doctest::Approx(99.333333333).epsilon(1e-9));
  CHECK(c.a == doctest::Approx(f.a).epsilon(1e-12));
  CHECK(c.rms_residual == doctest::Approx(f.rms).epsilon(1e-9));  // 0.2357
  for (const auto& k : t) CHECK(std::abs(c.value(k.anchor_px) - k.value) <= 3 * c.rms_residual);

  CHECK_THROWS_AS(calibrate({{100, 400}, {200, 500}, {300, 200}}), NonMonotonic);
  CHECK_THROWS_AS(calibrate({{100, 1}}), InsufficientTicks);
  CHECK_THROWS_AS(calibrate({{100, 1}, {100, 2}}), InsufficientTicks);
}

TEST_CASE("calibrate drops a single misread among four or more ticks") {
  const auto c = calibrate({{100, 100}, {200, 200}, {300, 800}, {400, 400}, {500, 500}});
  CHECK(c.outlier_dropped);
  CHECK(c.a == doctest::Approx(1.0));
  CHECK(c.b == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("property: collinear ticks fit exactly and round trips are identities") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1000, 1000);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = u(rng) / 100 + (trial % 2 ? 0.01 : -0.01), b = u(rng);
    std::vector<TickLabel> t;
    for (int k = 0; k < 2 + trial % 5; ++k) t.push_back({40.0 + 73 * k, a * (40.0 + 73 * k) + b});
    const auto c = calibrate(t);
    CHECK(c.rms_residual <= 1e-9 * (1 + std::abs(b)));
    for (const auto& k : t) CHECK(c.value(k.anchor_px) == doctest::Approx(k.value).epsilon(1e-9));
    const double px = u(rng);
    CHECK(std::abs(c.pixel(c.value(px)) - px) <= 1e-9 * std::max(1.0, std::abs(px)));
  }
}

TEST_CASE("tick marks") {
  const auto spec = three_ticks();
  const auto img = synth::generate_scene(spec).first;
  const auto marks = detect_tick_marks(to_grayscale(img), axes_of(spec));
  REQUIRE(marks.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(marks[k] - spec.tick_px(k)) <= 1);

  auto bare = spec;
  bare.draw_ticks = false;
  CHECK(detect_tick_marks(to_grayscale(synth::generate_scene(bare).first), axes_of(bare)).empty());

  // strokes above the axis only
  auto above = bare;
  RasterImage img2 = synth::generate_scene(above).first;
  for (int k = 0; k < 3; ++k)
    for (int y = spec.origin_y - 6; y < spec.origin_y; ++y) img2.set(spec.tick_px(k), y, rgb(0, 0, 0));
  CHECK(detect_tick_marks(to_grayscale(img2), axes_of(above)).empty());
}

TEST_CASE("property: tick marks are strictly increasing") {
  for (const auto& spec : synth::standard_suite(10, 9)) {
    const auto marks = detect_tick_marks(to_grayscale(synth::generate_scene(spec).first), axes_of(spec));
    for (std::size_t i = 1; i < marks.size(); ++i) CHECK(marks[i] > marks[i - 1]);
  }
}

TEST_CASE("text boxes and built-in recognition") {
  const auto spec = three_ticks();
  const auto img = synth::generate_scene(spec).first;
  auto boxes = detect_text_boxes(img, axes_of(spec));
  REQUIRE(boxes.size() == 3);
  for (std::size_t i = 1; i < boxes.size(); ++i) CHECK(boxes[i].bbox.x0 > boxes[i - 1].bbox.x1);
  BuiltinRecognizer rec;
  boxes = recognize(boxes, img, rec);
  CHECK(boxes[0].text == "100");
  CHECK(boxes[1].text == "200");
  CHECK(boxes[2].text == "300");
  CHECK(boxes[0].confidence == 1.0);

  auto one = spec;
  one.tick_count = 1;
  const auto b1 = detect_text_boxes(synth::generate_scene(one).first, axes_of(one));
  REQUIRE(b1.size() == 1);
  const int w = font::text_width("100", one.label_scale);
  // blank glyph columns at either end may fall outside the ink box
  CHECK(b1[0].bbox.width() <= w);
  CHECK(b1[0].bbox.width() >= w - 2 * one.label_scale);

  auto none = spec;
  none.draw_labels = false;
  CHECK(detect_text_boxes(synth::generate_scene(none).first, axes_of(none)).empty());
}

TEST_CASE("font round trip for every glyph sequence") {
  BuiltinRecognizer rec;
  for (const char* text : {"250", "-1.5", "0.25", "1e3", "9876543210", "+42"}) {
    for (int scale : {1, 2, 3}) {
      RasterImage img(font::text_width(text, scale) + 8, font::text_height(scale) + 8);
      font::draw_text(img, 4, 4, text, scale, rgb(0, 0, 0));
      TextBox box;
      box.bbox = {4, 4, 4 + font::text_width(text, scale), 4 + font::text_height(scale)};
      const auto out = rec.recognize({box}, img);
      CHECK_MESSAGE(out[0].text == text, text << " at scale " << scale);
    }
  }
}

TEST_CASE("unreadable smudge yields empty text") {
  RasterImage img(30, 20);
  for (int y = 5; y < 15; ++y)
    for (int x = 3; x < 27; ++x) img.set(x, y, rgb(0, 0, 0));
  BuiltinRecognizer rec;
  TextBox box;
  box.bbox = {0, 0, 30, 20};
  CHECK(rec.recognize({box}, img)[0].text.empty());
}

TEST_CASE("association") {
  std::vector<TextBox> boxes(3);
  boxes[0] = {{90, 0, 110, 10}, "100", 1};
  boxes[1] = {{195, 0, 215, 10}, "200", 1};
  boxes[2] = {{500, 0, 520, 10}, "x", 1};  // not numeric: excluded
  const auto t = associate({101, 199}, boxes);
  REQUIRE(t.size() == 2);
  CHECK(t[0].anchor_px == 101);
  CHECK(t[0].value == 100);
  CHECK(t[1].anchor_px == 199);
  // no tick marks: box centers are the anchors
  const auto t2 = associate({}, boxes);
  REQUIRE(t2.size() == 2);
  CHECK(t2[1].anchor_px == 204.5);
}

TEST_CASE("external recognizer protocol") {
  const auto spec = three_ticks();
  const auto img = synth::generate_scene(spec).first;
  const auto boxes = detect_text_boxes(img, axes_of(spec));
  REQUIRE(boxes.size() == 3);

  SUBCASE("out-of-order fixture echo") {
    ExternalRecognizer rec(std::string(MOCK_RECOGNIZER) + " fixture 11 Fe 33");
    const auto out = rec.recognize(boxes, img);
    CHECK(out[0].text == "11");
    CHECK(out[1].text == "Fe");
    CHECK(out[2].text == "33");
    CHECK(out[1].confidence == doctest::Approx(0.9));
    // instance is reusable
    CHECK(rec.recognize(boxes, img)[2].text == "33");
  }
  SUBCASE("reads crops like the built-in matcher") {
    ExternalRecognizer rec(std::string(MOCK_RECOGNIZER) + " builtin");
    const auto out = rec.recognize(boxes, img);
    CHECK(out[0].text == "100");
    CHECK(out[2].text == "300");
  }
  SUBCASE("per-box failure is empty text") {
    ExternalRecognizer rec(std::string(MOCK_RECOGNIZER) + " fixture 1 _ 3");
    const auto out = rec.recognize(boxes, img);
    CHECK(out[1].text.empty());
    CHECK(out[1].confidence == 0);
  }
  SUBCASE("protocol violations") {
    ExternalRecognizer garbage(std::string(MOCK_RECOGNIZER) + " garbage");
    CHECK_THROWS_AS(garbage.recognize(boxes, img), RecognizerUnavailable);
    ExternalRecognizer quits(std::string(MOCK_RECOGNIZER) + " exit");
    CHECK_THROWS_AS(quits.recognize(boxes, img), RecognizerUnavailable);
    ExternalRecognizer missing("/nonexistent/recognizer");
    CHECK_THROWS_AS(missing.recognize(boxes, img), RecognizerUnavailable);
  }
  SUBCASE("timeout leaves boxes empty") {
    ExternalRecognizer rec(std::string(MOCK_RECOGNIZER) + " silent", std::chrono::milliseconds(300));
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = rec.recognize(boxes, img);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(3));
    for (const auto& b : out) CHECK(b.text.empty());
  }
}
