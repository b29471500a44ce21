#include "plotdigit/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "plotdigit/errors.hpp"

namespace plotdigit::trace {

std::vector<Run> column_runs(const segment::SemanticMap& mask, int x) {
  std::vector<Run> runs;
  const int h = static_cast<int>(mask.height());
  int y = 0;
  while (y < h) {
    if (!mask(x, y)) {
      ++y;
      continue;
    }
    const int begin = y;
    while (y < h && mask(x, y)) ++y;
    runs.push_back({begin, y});
  }
  return runs;
}

int estimate_line_count(const segment::SemanticMap& mask) {
  std::map<int, int> histogram;
  for (int x = 0; x < mask.width(); ++x) {
    const int n = static_cast<int>(column_runs(mask, x).size());
    if (n >= 1) ++histogram[n];
  }
  if (histogram.empty()) throw EmptyMask("semantic map has no foreground pixels");
  int best = 0, best_count = -1;
  for (const auto& [runs, count] : histogram)
    if (count >= best_count) {
      best = runs;
      best_count = count;
    }
  return best;
}

StartPosition select_start(const segment::SemanticMap& mask, const GradientField& grad, int lines) {
  const int w = static_cast<int>(mask.width());
  std::vector<int> run_count(w);
  for (int x = 0; x < w; ++x) run_count[x] = static_cast<int>(column_runs(mask, x).size());

  // neighbors past the border don't count against a column
  auto stable = [&](int x) {
    for (int d = -2; d <= 2; ++d)
      if (x + d >= 0 && x + d < w && run_count[x + d] != lines) return false;
    return true;
  };

  for (bool require_stable : {true, false}) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int x = 0; x < w; ++x) {
      if (run_count[x] != lines || (require_stable && !stable(x))) continue;
      double cost = 0;
      for (const Run& r : column_runs(mask, x))
        for (int y = r.begin; y < r.end; ++y) cost += std::abs(grad.gx(y, x));
      if (cost < best_cost) {
        best_cost = cost;
        best = x;
      }
    }
    if (best >= 0) {
      StartPosition s;
      s.column = best;
      for (const Run& r : column_runs(mask, best)) s.ys.push_back(r.center());
      return s;
    }
  }
  throw NoValidColumn("no column shows exactly " + std::to_string(lines) + " foreground runs");
}

double semantic_step(double y_hat, std::span<const double> y_cand, double delta_s) {
  if (y_cand.empty()) return y_hat;
  double nearest = y_cand[0];
  double best = std::abs(y_cand[0] - y_hat);
  for (double y : y_cand.subspan(1)) {
    const double d = std::abs(y - y_hat);
    if (d < best || (d == best && y < nearest)) {
      best = d;
      nearest = y;
    }
  }
  return best < delta_s ? y_hat : nearest;
}

ColorStepResult color_step(int x, double y_hat, const Rgb& ref, const RasterImage& img, int delta,
                           double delta_c) {
  const int center = static_cast<int>(std::lround(y_hat));
  const int lo = std::max(0, center - delta);
  const int hi = std::min(img.height() - 1, center + delta);
  if (lo > hi) return {y_hat, false};
  int best_y = lo;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = lo; y <= hi; ++y) {
    const double d = color_distance(img.at(x, y), ref);
    const bool closer = std::abs(y - y_hat) < std::abs(best_y - y_hat);
    if (d < best_d || (d == best_d && closer)) {
      best_d = d;
      best_y = y;
    }
  }
  if (best_d < delta_c) return {y_hat, false};
  return {double(best_y), true};
}

double sample_velocity(const VelocityField& vel, int x, double y, int window) {
  const int h = static_cast<int>(vel.height());
  const int r = std::clamp(static_cast<int>(std::lround(y)), 0, h - 1);
  double sum = 0, weight = 0;
  for (int yy = std::max(0, r - window); yy <= std::min(h - 1, r + window); ++yy)
    if (vel.valid(yy, x)) {
      sum += vel.weight(yy, x) * vel.v(yy, x);
      weight += vel.weight(yy, x);
    }
  return weight > 0 ? sum / weight : 0.0;
}

namespace {

class ReferenceColor {
 public:
  ReferenceColor(const Rgb& seed, int window) : window_(std::max(1, window)) { samples_.push_back(seed); }

  void accept(const Rgb& c) {
    samples_.push_back(c);
    while (static_cast<int>(samples_.size()) > window_) samples_.pop_front();
  }

  Rgb median() const {
    Rgb out;
    std::vector<std::uint8_t> ch(samples_.size());
    for (int c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < samples_.size(); ++i) ch[i] = samples_[i][c];
      std::nth_element(ch.begin(), ch.begin() + ch.size() / 2, ch.end());
      out[c] = ch[ch.size() / 2];
    }
    return out;
  }

 private:
  int window_;
  std::deque<Rgb> samples_;
};

Rgb pixel_at(const RasterImage& img, int x, double y) {
  return img.at(x, std::clamp(static_cast<int>(std::lround(y)), 0, img.height() - 1));
}

// Runs of column x restricted to pixels within tol of ref (all foreground
// pixels when tol is infinite).
std::vector<Run> line_runs(const segment::SemanticMap& fg, const RasterImage& img, int x, const Rgb& ref,
                           double tol) {
  std::vector<Run> runs;
  const int h = img.height();
  int y = 0;
  auto member = [&](int yy) { return fg(x, yy) && (std::isinf(tol) || color_distance(img.at(x, yy), ref) < tol); };
  while (y < h) {
    if (!member(y)) {
      ++y;
      continue;
    }
    const int begin = y;
    while (y < h && member(y)) ++y;
    runs.push_back({begin, y});
  }
  return runs;
}

const Run* run_containing(const std::vector<Run>& runs, double y) {
  const long r = std::lround(y);
  for (const Run& run : runs)
    if (r >= run.begin && r < run.end) return &run;
  return nullptr;
}

TraceBundle sweep(const RasterImage& img, const segment::SemanticMap& fg, const VelocityField& vel,
                  const StartPosition& start, const TraceParams& p) {
  const int w = img.width(), h = img.height();
  const int m = static_cast<int>(start.ys.size());
  TraceBundle bundle;
  bundle.width = w;
  bundle.traces.resize(m);
  for (int k = 0; k < m; ++k) {
    auto& t = bundle.traces[k];
    t.id = k;
    t.y = Eigen::VectorXd::Zero(w);
    t.provenance.assign(w, Provenance::flow);
    t.y[start.column] = start.ys[k];
    t.color = pixel_at(img, start.column, start.ys[k]);
  }

  // Candidate pixels must match the line's color only when the color step
  // is enabled; otherwise every line sees all foreground.
  const double tol = p.use_color && p.color_candidates ? p.delta_c : std::numeric_limits<double>::infinity();

  for (int direction : {+1, -1}) {
    std::vector<ReferenceColor> refs;
    std::vector<double> y(m), y_hat(m);
    for (int k = 0; k < m; ++k) {
      refs.emplace_back(bundle.traces[k].color, p.ref_color_window);
      y[k] = start.ys[k];
    }
    std::vector<std::vector<Run>> next(m);

    for (int x = start.column; x + direction >= 0 && x + direction < w; x += direction) {
      const int nx = x + direction;
      std::vector<Rgb> ref(m);
      for (int k = 0; k < m; ++k) ref[k] = refs[k].median();

      for (int k = 0; k < m; ++k) {
        const double v = std::clamp(sample_velocity(vel, x, y[k], p.velocity_window), -p.v_max, p.v_max);
        y_hat[k] = std::clamp(y[k] + direction * v, 0.0, double(h - 1));
      }

      for (int k = 0; k < m; ++k) next[k] = line_runs(fg, img, nx, ref[k], tol);

      std::vector<Provenance> prov(m, Provenance::flow);
      if (p.use_semantic) {
        const std::vector<Run> all = column_runs(fg, nx);
        std::vector<double> proposal(m), snap_dist(m);
        std::vector<int> snap_run(m, -1);
        std::vector<double> cand;
        for (int k = 0; k < m; ++k) {
          cand.clear();
          for (const Run& r : next[k])
            for (int yy = r.begin; yy < r.end; ++yy)
              if (std::abs(yy - y_hat[k]) <= p.search_radius) cand.push_back(yy);
          proposal[k] = semantic_step(y_hat[k], cand, p.delta_s);
          if (proposal[k] != y_hat[k]) {
            for (std::size_t r = 0; r < all.size(); ++r)
              if (proposal[k] >= all[r].begin && proposal[k] < all[r].end) snap_run[k] = static_cast<int>(r);
            snap_dist[k] = std::abs(proposal[k] - y_hat[k]);
          }
        }
        // Two lines snapping onto one run: the closer predictor wins, the
        // other keeps its flow estimate.
        for (int k = 0; k < m; ++k) {
          if (proposal[k] == y_hat[k]) continue;
          bool wins = true;
          for (int j = 0; j < m && wins; ++j)
            if (j != k && snap_run[k] >= 0 && snap_run[j] == snap_run[k] &&
                (snap_dist[j] < snap_dist[k] || (snap_dist[j] == snap_dist[k] && j < k)))
              wins = false;
          if (wins) {
            y_hat[k] = proposal[k];
            prov[k] = Provenance::semantic_snap;
          }
        }
      }

      for (int k = 0; k < m; ++k) {
        y[k] = y_hat[k];
        if (p.use_color) {
          const ColorStepResult c = color_step(nx, y[k], ref[k], img, p.delta, p.delta_c);
          if (c.snapped) {
            y[k] = c.y;
            prov[k] = Provenance::color_snap;
          }
        }
      }

      if (p.recenter) {
        // Center on the line's own run unless another line sits in it too.
        std::vector<const Run*> own(m);
        for (int k = 0; k < m; ++k) own[k] = run_containing(next[k], y[k]);
        std::vector<double> centered = y;
        for (int k = 0; k < m; ++k) {
          if (!own[k]) continue;
          bool shared = false;
          for (int j = 0; j < m && !shared; ++j)
            shared = j != k && std::lround(y[j]) >= own[k]->begin && std::lround(y[j]) < own[k]->end;
          if (!shared) centered[k] = own[k]->center();
        }
        y = centered;
      }

      for (int k = 0; k < m; ++k) {
        auto& t = bundle.traces[k];
        t.y[nx] = y[k];
        t.provenance[nx] = prov[k];
        const Rgb c = pixel_at(img, nx, y[k]);
        if (color_distance(c, ref[k]) < p.delta_c) refs[k].accept(c);
      }
    }
  }
  return bundle;
}

// Dynamic program over integer rows within +-band of the swept path,
// minimizing the same sum trace_losses reports for that line.
void refine_trace(Trace& t, const RasterImage& img, const segment::ProbabilityMap& probmap,
                  const VelocityField& vel, int band) {
  const int w = img.width(), h = img.height(), n = 2 * band + 1;
  if (w == 0) return;
  auto row_of = [&](int i, int s) { return std::clamp(static_cast<int>(std::lround(t.y[i])) + s - band, 0, h - 1); };
  auto unary = [&](int i, int r) {
    const double q = 1.0 - probmap(i, r);
    return q * q;
  };
  std::vector<double> cost(n), next_cost(n);
  std::vector<std::vector<int>> back(w, std::vector<int>(n, 0));
  for (int s = 0; s < n; ++s) cost[s] = unary(0, row_of(0, s));
  for (int i = 0; i + 1 < w; ++i) {
    for (int s2 = 0; s2 < n; ++s2) {
      const int r2 = row_of(i + 1, s2);
      const Eigen::Vector3d c2 = img.at(i + 1, r2).cast<double>();
      double best = std::numeric_limits<double>::infinity();
      for (int s1 = 0; s1 < n; ++s1) {
        const int r1 = row_of(i, s1);
        const double dv = r2 - r1 - vel.v(r1, i);
        const double c = cost[s1] + (c2 - img.at(i, r1).cast<double>()).squaredNorm() + dv * dv;
        if (c < best) {
          best = c;
          back[i + 1][s2] = s1;
        }
      }
      next_cost[s2] = best + unary(i + 1, r2);
    }
    std::swap(cost, next_cost);
  }
  int s = static_cast<int>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  Eigen::VectorXd out(w);
  for (int i = w - 1; i >= 0; --i) {
    out[i] = row_of(i, s);
    s = back[i][s];
  }
  t.y = out;
}

}  // namespace

TraceBundle trace_lines(const RasterImage& img, const segment::ProbabilityMap& probmap,
                        const VelocityField& vel, const StartPosition& start, const TraceParams& p) {
  if (probmap.width() != img.width() || probmap.height() != img.height() || vel.width() != img.width() ||
      vel.height() != img.height())
    throw DimensionMismatch("trace_lines: image, probability map and velocity field differ in size");
  if (start.column < 0 || start.column >= img.width())
    throw NoValidColumn("start column outside the plot");
  if (p.stretch_factor < 1) throw std::invalid_argument("trace_lines: stretch_factor < 1");

  if (p.refine_band < 0) throw std::invalid_argument("trace_lines: refine_band < 0");
  auto refine = [&](TraceBundle b) {
    if (p.refine_band > 0)
      for (auto& t : b.traces) refine_trace(t, img, probmap, vel, p.refine_band);
    return b;
  };

  if (p.stretch_factor == 1) return refine(sweep(img, segment::binarize(probmap, p.threshold), vel, start, p));

  const int s = p.stretch_factor;
  const RasterImage simg = stretch_x(img, s);
  const segment::ProbabilityMap sprob{stretch_x(probmap.values, s)};
  const Plane<double> valid = vel.valid.cast<double>();
  const Plane<double> sv = stretch_x((vel.v * valid).eval(), s);
  const Plane<double> sw = stretch_x(valid, s);
  const Plane<double> sweight = stretch_x(vel.weight, s);
  VelocityField svel{Plane<double>::Zero(sv.rows(), sv.cols()), Mask::Zero(sv.rows(), sv.cols()),
                     Plane<double>::Zero(sv.rows(), sv.cols())};
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sw.data()[i] >= 0.5) {
      svel.v.data()[i] = std::clamp(sv.data()[i] / sw.data()[i] / s, -p.v_max, p.v_max);
      svel.valid.data()[i] = 1;
      svel.weight.data()[i] = sweight.data()[i];
    }
  StartPosition sstart = start;
  sstart.column = start.column * s;

  const TraceBundle stretched = sweep(simg, segment::binarize(sprob, p.threshold), svel, sstart, p);
  TraceBundle out;
  out.width = img.width();
  for (const auto& st : stretched.traces) {
    Trace t;
    t.id = st.id;
    t.color = st.color;
    t.y.resize(img.width());
    t.provenance.resize(img.width());
    for (int x = 0; x < img.width(); ++x) {
      t.y[x] = st.y[x * s];
      t.provenance[x] = st.provenance[x * s];
    }
    out.traces.push_back(std::move(t));
  }
  return refine(std::move(out));
}

TraceLosses trace_losses(const TraceBundle& bundle, const RasterImage& img,
                         const segment::ProbabilityMap& probmap, const VelocityField& vel) {
  if (bundle.width != img.width()) throw DimensionMismatch("trace_losses: bundle width != image width");
  TraceLosses l;
  const int h = img.height();
  auto row = [h](double y) { return std::clamp(static_cast<int>(std::lround(y)), 0, h - 1); };
  for (const auto& t : bundle.traces) {
    for (int i = 0; i + 1 < bundle.width; ++i) {
      const Eigen::Vector3d d =
          img.at(i + 1, row(t.y[i + 1])).cast<double>() - img.at(i, row(t.y[i])).cast<double>();
      l.intensity += d.squaredNorm();
      const double r = t.y[i + 1] - t.y[i] - vel.v(row(t.y[i]), i);
      l.smooth += r * r;
    }
    for (int i = 0; i < bundle.width; ++i) {
      const double r = 1.0 - probmap(i, row(t.y[i]));
      l.semantic += r * r;
    }
  }
  l.total = l.intensity + l.smooth + l.semantic;
  return l;
}

TraceBundle extract_lines(const RasterImage& plot, const segment::ProbabilityMap& probmap,
                          const TraceParams& p, std::optional<int> line_count) {
  const GradientField grad = gradient_field(to_grayscale(plot), p.smooth_sigma);
  const VelocityField vel = velocity_field(grad, p.v_max, p.eps_g);
  const segment::SemanticMap fg = segment::binarize(probmap, p.threshold);
  const int m = line_count ? *line_count : estimate_line_count(fg);
  if (m < 1) throw EmptyMask("no lines to trace");
  const StartPosition start = select_start(fg, grad, m);
  return trace_lines(plot, probmap, vel, start, p);
}

}  // namespace plotdigit::trace
