// plotdigit: extract / evaluate / synthesize.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plotdigit/errors.hpp"
#include "plotdigit/image_io.hpp"
#include "plotdigit/json_io.hpp"
#include "plotdigit/pipeline.hpp"
#include "plotdigit/synthgen.hpp"

namespace fs = std::filesystem;
using namespace plotdigit;

namespace {

std::vector<fs::path> expand_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    if (fs::is_directory(a)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(a)) {
        const auto ext = e.path().extension().string();
        if (e.is_regular_file() && (ext == ".png" || ext == ".jpg" || ext == ".jpeg")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.emplace_back(a);
    }
  }
  return out;
}

BBox read_box(const fs::path& path) {
  const auto j = json_io::read_json(path);
  const auto& b = j.contains("region") ? j["region"] : j;
  try {
    return {b.at("x0").get<int>(), b.at("y0").get<int>(), b.at("x1").get<int>(), b.at("y1").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": expected {x0, y0, x1, y1}");
  }
}

int synthesize(const std::string& suite, int count, std::uint64_t seed, const fs::path& out) {
  std::vector<synth::SceneSpec> specs;
  if (suite == "standard")
    specs = synth::standard_suite(count, seed);
  else if (suite == "clean")
    specs = synth::clean_suite(count, seed);
  else
    specs = synth::sharp_peak_specs(count, seed);
  if (specs.empty()) return 0;
  fs::create_directories(out);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto [img, gt] = synth::generate_scene(specs[i]);
    const std::string id = synth::scene_id(static_cast<int>(i));
    gt.image = id + ".png";
    io::write_png(out / (id + ".png"), img);
    json_io::write_text(out / (id + ".json"), json_io::dump(json_io::to_json(gt)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digitize line plots into numeric series"};
  app.require_subcommand(1);

  PipelineConfig config;
  std::vector<std::string> inputs;
  std::string out_dir = "out", probmap, box, format = "json";
  int neighborhood = config.trace.delta, lines = 0;
  unsigned seed = config.axes.rng_seed;

  auto* extract = app.add_subcommand("extract", "Extract line series from plot images");
  extract->add_option("--input", inputs, "Image files or directories")->required();
  extract->add_option("--out", out_dir, "Output directory");
  extract->add_option("--probmap", probmap, "Foreground probability PNG (or directory of <stem>.png)");
  extract->add_option("--box", box, "JSON coarse plot box {x0,y0,x1,y1}");
  extract->add_option("--delta-s", config.trace.delta_s, "Semantic step tolerance, px")->capture_default_str();
  extract->add_option("--delta-c", config.trace.delta_c, "Color step tolerance, RGB distance")->capture_default_str();
  extract->add_option("--neighborhood", neighborhood, "Color search half-height, px")->capture_default_str();
  extract->add_option("--vmax", config.trace.v_max, "Velocity clamp, px/column")->capture_default_str();
  extract->add_option("--stretch", config.trace.stretch_factor, "Horizontal stretch factor")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  extract->add_option("--refine-band", config.trace.refine_band,
                      "Minimize the trace losses within +-N rows of each swept line (0: off)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  extract->add_option("--eps1", config.axes.eps1, "Axis parallelism threshold (cos^2)")->capture_default_str();
  extract->add_option("--eps2", config.axes.eps2, "Axis length ratio threshold")->capture_default_str();
  extract->add_option("--lines", lines, "Number of lines (default: estimated)")->check(CLI::PositiveNumber);
  extract->add_option("--recognizer", config.recognizer_command, "External tick-label recognizer command");
  extract->add_flag("--overlay", config.overlay, "Write <stem>_overlay.png");
  extract->add_option("--seed", seed, "Hough sampling seed")->capture_default_str();
  extract->add_option("--jobs", config.jobs, "Parallel images")->capture_default_str()->check(CLI::PositiveNumber);
  extract->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();

  std::string pred_dir, gt_dir, report_dir;
  std::vector<double> eps_list{1, 2, 3, 4, 5};
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--pred", pred_dir, "Directory of extraction JSON")->required();
  evaluate->add_option("--gt", gt_dir, "Directory of ground-truth JSON")->required();
  evaluate->add_option("--eps", eps_list, "Distance thresholds, px")->capture_default_str();
  evaluate->add_option("--out", report_dir, "Write report.json and pr.csv here");

  std::string suite = "standard";
  int count = 100;
  std::uint64_t synth_seed = 42;
  std::string synth_out = "suite";
  auto* synthesize_cmd = app.add_subcommand("synthesize", "Generate synthetic plots with ground truth");
  synthesize_cmd->add_option("--suite", suite, "Scene family")
      ->check(CLI::IsMember({"standard", "clean", "sharp"}))
      ->capture_default_str();
  synthesize_cmd->add_option("--count", count, "Number of scenes")->capture_default_str()->check(CLI::NonNegativeNumber);
  synthesize_cmd->add_option("--seed", synth_seed, "Suite seed")->capture_default_str();
  synthesize_cmd->add_option("--out", synth_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) {
      config.trace.delta = neighborhood;
      config.axes.rng_seed = seed;
      if (lines > 0) config.line_count = lines;
      if (!probmap.empty()) config.probmap = probmap;
      if (!box.empty()) config.coarse_box = read_box(box);
      config.format = format == "csv" ? OutputFormat::csv : format == "both" ? OutputFormat::both : OutputFormat::json;
      const auto paths = expand_inputs(inputs);
      if (paths.empty()) {
        std::cerr << "no input images\n";
        return 1;
      }
      const BatchSummary s = run_batch(paths, out_dir, config);
      for (const auto& f : s.failures) std::cerr << "failed: " << f.input << ": " << f.error << "\n";
      std::cerr << s.succeeded << " of " << paths.size() << " images extracted\n";
      return s.exit_code();
    }
    if (*evaluate) {
      std::sort(eps_list.begin(), eps_list.end());
      const EvaluationReport r = evaluate_dirs(pred_dir, gt_dir, eps_list);
      const auto j = json_io::to_json(r);
      if (!report_dir.empty()) {
        fs::create_directories(report_dir);
        json_io::write_text(fs::path(report_dir) / "report.json", json_io::dump(j));
        json_io::write_text(fs::path(report_dir) / "pr.csv", json_io::pr_csv(r.pr));
      }
      std::cout << json_io::pr_csv(r.pr);
      std::printf("mean misalignment %.4f px over %zu images\n", r.misalignment.mean, r.images.size());
      for (const auto& id : r.missing_pred) std::cerr << "no prediction for " << id << "\n";
      for (const auto& id : r.missing_gt) std::cerr << "no ground truth for " << id << "\n";
      return 0;
    }
    return synthesize(suite, count, synth_seed, synth_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
