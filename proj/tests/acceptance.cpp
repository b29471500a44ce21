// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit when
// any criterion fails. Tolerances are fixed here, not tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "plotdigit/errors.hpp"
#include "plotdigit/image_io.hpp"
#include "plotdigit/json_io.hpp"
#include "plotdigit/pipeline.hpp"
#include "plotdigit/synthgen.hpp"

namespace fs = std::filesystem;
using namespace plotdigit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Scene {
  RasterImage img;
  synth::GroundTruth gt;
};

std::vector<Scene> render(const std::vector<synth::SceneSpec>& specs) {
  std::vector<Scene> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto [img, gt] = synth::generate_scene(specs[i]);
    gt.image = synth::scene_id(int(i));
    out.push_back({std::move(img), std::move(gt)});
  }
  return out;
}

std::vector<eval::Series> gt_series(const synth::GroundTruth& gt) {
  std::vector<eval::Series> out;
  for (std::size_t k = 0; k < gt.lines.size(); ++k) out.push_back({int(k), gt.region.x0, gt.lines[k]});
  return out;
}

// Mean |y - gt| per ground-truth line: the line's partner under the
// count-then-distance assignment, or its nearest trace when there are fewer
// traces than lines.
std::vector<double> line_errors(const std::vector<eval::Series>& preds, const std::vector<eval::Series>& gts) {
  std::vector<double> out(gts.size(), std::numeric_limits<double>::infinity());
  const auto m = eval::match_lines(preds, gts, std::numeric_limits<double>::max());
  for (const auto& p : m.pairs) out[p.gt_id] = p.distance;
  for (int g : m.unmatched_gt)
    for (const auto& p : preds) {
      try {
        out[g] = std::min(out[g], eval::line_distance(p, gts[g]));
      } catch (const InsufficientOverlap&) {
      }
    }
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

// Tracing on the plot interior of the ground-truth region, as the pipeline
// crops it.
struct Interior {
  BBox box;
  RasterImage img;
  segment::ProbabilityMap prob;
  std::vector<eval::Series> gts;  ///< in crop coordinates
};

Interior interior(const Scene& s) {
  const BBox r = s.gt.region;
  const AxisBand band = axis_band(to_grayscale(s.img), r);
  BBox inner = r;
  inner.x0 += band.left > 0 ? band.left + 1 : 0;
  inner.y1 -= band.bottom > 0 ? band.bottom + 1 : 0;
  Interior c{inner, s.img.crop(inner), {}, {}};
  c.prob = segment::classical_segment(c.img);
  for (std::size_t k = 0; k < s.gt.lines.size(); ++k)
    c.gts.push_back({int(k), 0,
                     (s.gt.lines[k].segment(inner.x0 - r.x0, inner.width()).array() - inner.y0).matrix()});
  return c;
}

std::vector<eval::Series> trace_series(const Interior& c, const segment::ProbabilityMap& prob,
                                       const trace::TraceParams& p, std::optional<int> m = std::nullopt) {
  std::vector<eval::Series> out;
  try {
    for (const auto& t : trace::extract_lines(c.img, prob, p, m).traces) out.push_back({t.id, 0, t.y});
  } catch (const Error&) {
    // no start column: every line unmatched
  }
  return out;
}

// A 20-column hole cut out of one line plus 0.5% salt foreground.
segment::ProbabilityMap degrade(const Interior& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  segment::ProbabilityMap m = c.prob;
  const int w = int(m.width()), h = int(m.height());
  const int k = int(rng() % c.gts.size());
  const int x0 = 20 + int(rng() % std::uint64_t(std::max(1, w - 60)));
  for (int x = x0; x < std::min(w, x0 + 20); ++x) {
    const int yc = int(std::lround(c.gts[k].y[x]));
    for (int y = std::max(0, yc - 4); y <= std::min(h - 1, yc + 4); ++y) m.values(y, x) = 0;
  }
  std::bernoulli_distribution salt(0.005);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (salt(rng)) m.values(y, x) = 1;
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

void end_to_end(const std::vector<Scene>& suite, double gen_seconds) {
  ticks::BuiltinRecognizer rec;
  std::vector<eval::ImageLines> images;
  int failed = 0;
  const auto t0 = Clock::now();
  for (const auto& s : suite) {
    eval::ImageLines L;
    L.gts = gt_series(s.gt);
    try {
      L.preds = to_series(extract_image(s.img, s.gt.image, PipelineConfig{}, rec));
    } catch (const Error&) {
      ++failed;
    }
    images.push_back(std::move(L));
  }
  const double secs = seconds_since(t0);
  const auto pr = eval::pr_curve(images, {1, 2, 3});
  const bool pass = pr[1].precision() >= 0.95 && pr[1].recall() >= 0.95 && secs <= 120;
  report(1, pass,
         fmt("end-to-end, %zu standard scenes: P=%.4f R=%.4f at eps 2 (need >= 0.95); at eps 1 P=%.4f R=%.4f; "
             "%d image failures; extraction %.1f s (need <= 120), synthesis %.1f s",
             suite.size(), pr[1].precision(), pr[1].recall(), pr[0].precision(), pr[0].recall(), failed, secs,
             gen_seconds));
}

void paper_counts() {
  // 935 lines; 831 within 1 px and 890 within 2 px of their partner.
  std::vector<eval::ImageLines> images;
  for (int i = 0; i < 935; ++i) {
    if (i % 5 == 0) images.emplace_back();
    const double base = 40.0 * (i % 5), off = i < 831 ? 0.5 : i < 890 ? 1.5 : 9.0;
    images.back().gts.push_back({i % 5, 0, Eigen::VectorXd::Constant(50, base)});
    images.back().preds.push_back({i % 5, 0, Eigen::VectorXd::Constant(50, base + off)});
  }
  const auto pr = eval::pr_curve(images, {1, 2});
  const bool pass = pr[0].matched == 831 && pr[0].n_gt == 935 && pr[1].matched == 890 && pr[1].n_gt == 935 &&
                    pr[0].recall() == 831.0 / 935.0 && pr[1].recall() == 890.0 / 935.0;
  report(2, pass,
         fmt("recall counts: %zu/%zu = %.5f at eps 1, %zu/%zu = %.5f at eps 2", pr[0].matched, pr[0].n_gt,
             pr[0].recall(), pr[1].matched, pr[1].n_gt, pr[1].recall()));
}

void axis_refinement() {
  const auto t0 = Clock::now();
  const auto specs = synth::clean_suite(100, 2024);
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> d(-8, 8);
  std::vector<Eigen::Vector2d> truth, before, after;
  for (const auto& spec : specs) {
    const auto [img, gt] = synth::generate_scene(spec);
    const BBox r = gt.region;
    BBox b{r.x0 + d(rng), r.y0 + d(rng), r.x1 + d(rng), r.y1 + d(rng)};
    b.x0 = std::clamp(b.x0, 0, img.width() - 2);
    b.y1 = std::clamp(b.y1, 2, img.height());
    b.x1 = std::clamp(b.x1, b.x0 + 1, img.width());
    b.y0 = std::clamp(b.y0, 0, b.y1 - 1);
    const auto lines = axes::detect_line_segments(to_grayscale(img), axes::AxisParams{});
    const auto ref = axes::refine_box(b, lines, axes::AxisParams{});
    truth.push_back(gt.origin);
    before.push_back(b.origin());
    after.push_back(ref.axes.origin);
  }
  const double secs = seconds_since(t0);
  const double pre = eval::misalignment(before, truth).mean, post = eval::misalignment(after, truth).mean;
  const double reduction = pre > 0 ? 1 - post / pre : 0;
  report(3, post <= 1.5 && reduction >= 0.40 && secs <= 30,
         fmt("axis refinement, 100 clean scenes, boxes perturbed +-8 px: misalignment %.3f -> %.3f px (need <= 1.5), "
             "reduction %.1f%% (need >= 40%%); %.1f s including synthesis (need <= 30)",
             pre, post, 100 * reduction, secs));
}

void velocity_check() {
  double worst = 0;
  const std::vector<double> as{-3, -1.5, 0, 0.75, 2.5}, bs{-4, -1.25, 1, 2, 5};
  for (double a : as)
    for (double b : bs) {
      GrayImage g(40, 40);
      for (int y = 0; y < 40; ++y)
        for (int x = 0; x < 40; ++x) g(y, x) = a * x + b * y;
      const auto v = velocity_field(gradient_field(g, 1.0), 1e12, 1.0);
      for (int y = 5; y < 35; ++y)
        for (int x = 5; x < 35; ++x) worst = std::max(worst, v.valid(y, x) ? std::abs(v.v(y, x) + a / b) : 1e9);
    }
  report(4, worst <= 1e-6, fmt("velocity of I = a x + b y over a 5x5 (a, b) grid: max interior |v + a/b| = %.3g (need <= 1e-6)", worst));
}

void oracle_equivalence() {
  constexpr int kCases = 2000;
  std::mt19937 rng(20240601);
  int sem_bad = 0, col_bad = 0, dist_bad = 0, bce_bad = 0, match_bad = 0;

  for (int i = 0; i < kCases; ++i) {
    std::vector<double> cand(rng() % 8);
    for (auto& c : cand) c = double(rng() % 50);
    const double yh = double(rng() % 50) + 0.25 * (rng() % 4);
    const double ds = 0.5 + rng() % 25;
    sem_bad += trace::semantic_step(yh, cand, ds) != oracle::semantic_step(yh, cand, ds);
  }
  for (int i = 0; i < kCases; ++i) {
    const int h = 5 + rng() % 40;
    RasterImage im(3, h);
    for (int y = 0; y < h; ++y) im.set(1, y, rgb(rng() % 5 * 60, rng() % 5 * 60, rng() % 5 * 60));
    const Rgb ref = rgb(rng() % 5 * 60, rng() % 5 * 60, rng() % 5 * 60);
    const double yh = double(rng() % h) + 0.3 * (rng() % 3);
    const int delta = 1 + rng() % 12;
    const double dc = double(rng() % 150);
    const auto got = trace::color_step(1, yh, ref, im, delta, dc);
    const auto want = oracle::color_step(1, yh, ref, im, delta, dc);
    col_bad += got.y != want.y || got.snapped != want.snapped;
  }
  for (int i = 0; i < kCases; ++i) {
    const auto a = oracle::random_series(rng, 0, 0, 60, 0, 100), b = oracle::random_series(rng, 1, 0, 60, 0, 100);
    const double want = oracle::line_distance(a, b);
    try {
      const double got = eval::line_distance(a, b);
      dist_bad += std::isnan(want) || std::abs(got - want) > 1e-12 * std::max(1.0, want);
    } catch (const InsufficientOverlap&) {
      dist_bad += !std::isnan(want);
    }
  }
  for (int i = 0; i < kCases; ++i) {
    const int w = 1 + rng() % 16, h = 1 + rng() % 16;
    segment::ProbabilityMap p{Plane<double>(h, w)};
    segment::SemanticMap c{Mask(h, w)};
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& v : p.values.reshaped()) v = rng() % 10 == 0 ? double(rng() % 2) : u(rng);
    for (auto& v : c.mask.reshaped()) v = rng() % 2;
    bce_bad += std::abs(segment::bce_score(p, c) - oracle::bce(p, c)) > 1e-12 * std::max(1.0, oracle::bce(p, c));
  }
  for (int i = 0; i < kCases; ++i) {
    const int np = rng() % 7, ng = rng() % 7;
    std::vector<eval::Series> preds, gts;
    for (int k = 0; k < np; ++k) preds.push_back(oracle::random_series(rng, k, 0, 15, 0, 5));
    for (int k = 0; k < ng; ++k) gts.push_back(oracle::random_series(rng, k, 0, 15, 0, 5));
    const double eps = 0.5 + 0.5 * (rng() % 5);
    const auto got = eval::match_lines(preds, gts, eps);
    const auto want = oracle::match_lines(preds, gts, eps);
    match_bad += int(got.pairs.size()) != want.count || std::abs(got.total_distance() - want.total) > 1e-9;
  }
  const int total = sem_bad + col_bad + dist_bad + bce_bad + match_bad;
  report(5, total == 0,
         fmt("oracle equivalence, %d cases each: discrepancies semantic_step %d, color_step %d, line_distance %d, "
             "bce_score %d, match_lines %d",
             kCases, sem_bad, col_bad, dist_bad, bce_bad, match_bad));
}

void imperfect_maps(const std::vector<Interior>& crops) {
  std::vector<double> errors;
  int over = 0;
  for (std::size_t i = 0; i < crops.size(); ++i) {
    const auto prob = degrade(crops[i], 1000 + i);
    for (double e : line_errors(trace_series(crops[i], prob, trace::TraceParams{}), crops[i].gts)) {
      errors.push_back(e);
      over += e > 2;
    }
  }
  const double m = mean(errors);
  report(6, m <= 2,
         fmt("holes + 0.5%% salt on %zu standard scenes: mean per-line trace error %.3f px (need <= 2); "
             "%d of %zu lines above 2 px",
             crops.size(), m, over, errors.size()));
}

void delta_s_sweep(const std::vector<Interior>& crops) {
  std::vector<segment::ProbabilityMap> maps;
  for (std::size_t i = 0; i < crops.size(); ++i) maps.push_back(degrade(crops[i], 1000 + i));
  std::string sweep;
  double r2 = 0, r20 = 0;
  for (double ds : {1.0, 2.0, 3.0, 5.0, 10.0, 20.0}) {
    trace::TraceParams p;
    p.delta_s = ds;
    std::vector<eval::ImageLines> images;
    for (std::size_t i = 0; i < crops.size(); ++i) images.push_back({trace_series(crops[i], maps[i], p), crops[i].gts});
    const double r = eval::pr_curve(images, {2})[0].recall();
    sweep += fmt(" %g:%.4f", ds, r);
    if (ds == 2) r2 = r;
    if (ds == 20) r20 = r;
  }
  report(7, r2 >= r20, fmt("delta_s sweep on the degraded suite, recall at eps 2 (need r(2) >= r(20)):%s", sweep.c_str()));
}

void ablation(const std::vector<Interior>& crops) {
  auto run = [&](bool semantic, bool color, bool recenter) {
    trace::TraceParams p;
    p.use_semantic = semantic;
    p.use_color = color;
    p.recenter = recenter;
    std::vector<double> errors;
    for (const auto& c : crops)
      for (double e : line_errors(trace_series(c, c.prob, p), c.gts)) errors.push_back(e);
    return mean(errors);
  };
  const double flow = run(false, false, false), sem = run(true, false, true), all = run(true, true, true);
  report(8, flow >= sem && sem >= all,
         fmt("ablation, mean trace error on %zu standard scenes: flow only %.3f >= flow+semantic %.3f >= all %.3f px",
             crops.size(), flow, sem, all));
}

void sharp_peaks() {
  const auto suite = synth::sharp_peak_suite(1, 20);
  ticks::BuiltinRecognizer rec;
  auto recall = [&](int stretch) {
    PipelineConfig c;
    c.trace.stretch_factor = stretch;
    std::vector<eval::ImageLines> images;
    for (const auto& [img, gt] : suite) {
      eval::ImageLines L;
      L.gts = gt_series(gt);
      try {
        L.preds = to_series(extract_image(img, gt.image, c, rec));
      } catch (const Error&) {
      }
      images.push_back(std::move(L));
    }
    return eval::pr_curve(images, {2})[0].recall();
  };
  const double r1 = recall(1), r2 = recall(2);
  report(9, r2 - r1 >= 0.1,
         fmt("sharp-peak suite (20 scenes, slope >= 15): recall at eps 2 stretch 1 %.4f, stretch 2 %.4f, gain %.4f (need >= 0.1)",
             r1, r2, r2 - r1));
}

void determinism(const std::vector<Scene>& suite) {
  const fs::path root = fs::temp_directory_path() / "plotdigit_acceptance";
  fs::remove_all(root);
  fs::create_directories(root / "in");
  for (const auto& s : suite) io::write_png(root / "in" / (s.gt.image + ".png"), s.img);
  const std::string cli = PLOTDIGIT_CLI;
  const int rc1 = std::system((cli + " extract --input " + (root / "in").string() + " --out " + (root / "a").string() +
                               " 2>/dev/null").c_str());
  const int rc2 = std::system((cli + " extract --input " + (root / "in").string() + " --out " + (root / "b").string() +
                               " --jobs 2 2>/dev/null").c_str());
  int identical = 0, valid = 0, compared = 0;
  for (const auto& s : suite) {
    const std::string name = s.gt.image + ".json";
    if (!fs::exists(root / "a" / name)) continue;
    ++compared;
    const std::string a = slurp(root / "a" / name), b = slurp(root / "b" / name);
    identical += a == b;
    try {
      json_io::validate_extraction(nlohmann::ordered_json::parse(a));
      ++valid;
    } catch (const std::exception&) {
    }
  }
  const bool pass = rc1 == 0 && rc2 == 0 && compared == int(suite.size()) && identical == compared && valid == compared;
  report(10, pass,
         fmt("determinism: two CLI extract runs (1 and 2 jobs) over %zu images: %d/%d JSON byte-identical, %d schema-valid",
             suite.size(), identical, compared, valid));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  auto tg = Clock::now();
  const std::vector<Scene> standard = render(synth::standard_suite(100, 42));
  const double gen = seconds_since(tg);

  end_to_end(standard, gen);
  paper_counts();
  axis_refinement();
  velocity_check();
  oracle_equivalence();

  std::vector<Interior> crops;
  for (const auto& s : standard) crops.push_back(interior(s));
  imperfect_maps(crops);
  delta_s_sweep(crops);
  ablation(crops);
  sharp_peaks();
  determinism(standard);

  std::printf("%d criteria failed; total %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
