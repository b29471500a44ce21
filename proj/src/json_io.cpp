#include "plotdigit/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "plotdigit/errors.hpp"

namespace plotdigit::json_io {

namespace {

double round_to(double v, int decimals) {
  const double s = std::pow(10.0, decimals);
  const double r = std::round(v * s) / s;
  return r == 0 ? 0.0 : r;  // no "-0.0" in output
}

Json bbox_json(const BBox& b) { return Json{{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}}; }

[[noreturn]] void schema_fail(const std::string& path, const std::string& why) {
  throw SchemaError(path + ": " + why);
}

void require(bool ok, const std::string& path, const std::string& why) {
  if (!ok) schema_fail(path, why);
}

BBox bbox_from(const Json& j, const std::string& path) {
  require(j.is_object(), path, "expected object");
  BBox b;
  for (auto [key, dst] : {std::pair{"x0", &b.x0}, {"y0", &b.y0}, {"x1", &b.x1}, {"y1", &b.y1}}) {
    require(j.contains(key) && j[key].is_number_integer(), path + "." + key, "expected integer");
    *dst = j[key].get<int>();
  }
  require(b.valid(), path, "empty box");
  return b;
}

Eigen::Vector2d point_from(const Json& j, const std::string& path) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(), path,
          "expected [number, number]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Json to_json(const ExtractionResult& r) {
  Json j;
  j["image"] = r.image;
  j["region"] = bbox_json(r.region);
  j["origin"] = Json::array({round_to(r.origin.x(), 3), round_to(r.origin.y(), 3)});
  if (r.calibration)
    j["calibration"] = Json{{"a", r.calibration->a}, {"b", r.calibration->b}, {"rms", r.calibration->rms}};
  else
    j["calibration"] = nullptr;
  Json lines = Json::array();
  for (const auto& l : r.lines) {
    Json pts = Json::array();
    for (const auto& p : l.points) pts.push_back(Json::array({round_to(p.x(), 6), round_to(p.y(), 3)}));
    lines.push_back(Json{{"id", l.id}, {"color", Json::array({l.color[0], l.color[1], l.color[2]})}, {"points", pts}});
  }
  j["lines"] = lines;
  j["warnings"] = r.warnings;
  return j;
}

void validate_extraction(const Json& j) {
  require(j.is_object(), "$", "expected object");
  static const char* kKeys[] = {"image", "region", "origin", "calibration", "lines", "warnings"};
  require(j.size() == std::size(kKeys), "$", "expected exactly the keys image, region, origin, calibration, lines, warnings");
  std::size_t k = 0;
  for (auto it = j.begin(); it != j.end(); ++it, ++k)
    require(it.key() == kKeys[k], "$", std::string("key ") + kKeys[k] + " out of order or missing");

  require(j["image"].is_string(), "$.image", "expected string");
  const BBox region = bbox_from(j["region"], "$.region");
  point_from(j["origin"], "$.origin");
  const Json& cal = j["calibration"];
  if (!cal.is_null()) {
    require(cal.is_object() && cal.size() == 3, "$.calibration", "expected {a, b, rms} or null");
    for (const char* key : {"a", "b", "rms"})
      require(cal.contains(key) && cal[key].is_number(), std::string("$.calibration.") + key, "expected number");
    require(cal["rms"].get<double>() >= 0, "$.calibration.rms", "negative");
  }
  require(j["lines"].is_array(), "$.lines", "expected array");
  for (std::size_t i = 0; i < j["lines"].size(); ++i) {
    const Json& l = j["lines"][i];
    const std::string path = "$.lines[" + std::to_string(i) + "]";
    require(l.is_object() && l.contains("id") && l["id"].is_number_integer(), path + ".id", "expected integer");
    require(l.contains("color") && l["color"].is_array() && l["color"].size() == 3, path + ".color",
            "expected [r, g, b]");
    for (const auto& c : l["color"])
      require(c.is_number_integer() && c.get<int>() >= 0 && c.get<int>() <= 255, path + ".color",
              "channel outside 0..255");
    require(l.contains("points") && l["points"].is_array(), path + ".points", "expected array");
    require(static_cast<int>(l["points"].size()) == region.width(), path + ".points",
            "point count differs from region width");
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < l["points"].size(); ++p) {
      const Eigen::Vector2d pt = point_from(l["points"][p], path + ".points[" + std::to_string(p) + "]");
      require(pt.x() > prev, path + ".points[" + std::to_string(p) + "]", "x not strictly increasing");
      prev = pt.x();
    }
  }
  require(j["warnings"].is_array(), "$.warnings", "expected array");
  for (const auto& w : j["warnings"]) require(w.is_string(), "$.warnings", "expected strings");
}

ExtractionResult extraction_from_json(const Json& j) {
  validate_extraction(j);
  ExtractionResult r;
  r.image = j["image"].get<std::string>();
  r.region = bbox_from(j["region"], "$.region");
  r.origin = point_from(j["origin"], "$.origin");
  if (!j["calibration"].is_null())
    r.calibration = Calibration{j["calibration"]["a"].get<double>(), j["calibration"]["b"].get<double>(),
                                j["calibration"]["rms"].get<double>()};
  for (const auto& l : j["lines"]) {
    LineResult line;
    line.id = l["id"].get<int>();
    line.color = rgb(l["color"][0].get<int>(), l["color"][1].get<int>(), l["color"][2].get<int>());
    for (const auto& p : l["points"]) line.points.push_back(point_from(p, "$.lines.points"));
    r.lines.push_back(std::move(line));
  }
  for (const auto& w : j["warnings"]) r.warnings.push_back(w.get<std::string>());
  return r;
}

Json to_json(const synth::GroundTruth& gt) {
  Json j;
  j["image"] = gt.image;
  j["region"] = bbox_json(gt.region);
  j["origin"] = Json::array({gt.origin.x(), gt.origin.y()});
  Json ticks = Json::array();
  for (const auto& [px, value] : gt.ticks) ticks.push_back(Json::array({px, value}));
  j["ticks"] = ticks;
  Json lines = Json::array();
  for (std::size_t k = 0; k < gt.lines.size(); ++k) {
    Json ys = Json::array();
    for (double y : gt.lines[k]) ys.push_back(round_to(y, 4));
    lines.push_back(Json{{"id", k}, {"y", ys}});
  }
  j["lines"] = lines;
  return j;
}

synth::GroundTruth ground_truth_from_json(const Json& j) {
  require(j.is_object(), "$", "expected object");
  for (const char* key : {"image", "region", "origin", "ticks", "lines"})
    require(j.contains(key), std::string("$.") + key, "missing");
  synth::GroundTruth gt;
  require(j["image"].is_string(), "$.image", "expected string");
  gt.image = j["image"].get<std::string>();
  gt.region = bbox_from(j["region"], "$.region");
  gt.origin = point_from(j["origin"], "$.origin");
  require(j["ticks"].is_array(), "$.ticks", "expected array");
  for (const auto& t : j["ticks"]) {
    const Eigen::Vector2d p = point_from(t, "$.ticks[]");
    gt.ticks.emplace_back(p.x(), p.y());
  }
  require(j["lines"].is_array(), "$.lines", "expected array");
  for (const auto& l : j["lines"]) {
    require(l.is_object() && l.contains("y") && l["y"].is_array(), "$.lines[].y", "expected array");
    Eigen::VectorXd y(l["y"].size());
    for (std::size_t i = 0; i < l["y"].size(); ++i) {
      require(l["y"][i].is_number(), "$.lines[].y", "expected numbers");
      y[Eigen::Index(i)] = l["y"][i].get<double>();
    }
    gt.lines.push_back(std::move(y));
  }
  return gt;
}

Json to_json(const EvaluationReport& r) {
  Json j;
  Json pr = Json::array();
  for (const auto& p : r.pr)
    pr.push_back(Json{{"eps_p", p.eps_p},
                      {"matched", p.matched},
                      {"predicted", p.n_pred},
                      {"ground_truth", p.n_gt},
                      {"precision", p.precision()},
                      {"recall", p.recall()}});
  j["pr"] = pr;
  Json per_image = Json::array();
  for (std::size_t i = 0; i < r.images.size(); ++i)
    per_image.push_back(Json{{"image", r.images[i]}, {"distance", r.misalignment.per_image.at(i)}});
  j["misalignment"] = Json{{"mean", r.misalignment.mean}, {"per_image", per_image}};
  j["missing_predictions"] = r.missing_pred;
  j["missing_ground_truth"] = r.missing_gt;
  return j;
}

std::string pr_csv(const std::vector<eval::PRPoint>& pr) {
  std::ostringstream out;
  out << "eps_p,matched,predicted,ground_truth,precision,recall\n";
  char buf[160];
  for (const auto& p : pr) {
    std::snprintf(buf, sizeof buf, "%g,%zu,%zu,%zu,%.6f,%.6f\n", p.eps_p, p.matched, p.n_pred, p.n_gt,
                  p.precision(), p.recall());
    out << buf;
  }
  return out.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseFailure("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseFailure(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace plotdigit::json_io
