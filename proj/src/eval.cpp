#include "plotdigit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "plotdigit/errors.hpp"

namespace plotdigit::eval {

double line_distance(const Series& a, const Series& b) {
  const int lo = std::max(a.x0, b.x0), hi = std::min(a.x1(), b.x1());
  const long shorter = std::min(a.y.size(), b.y.size());
  const int shared = std::max(0, hi - lo);
  if (shared == 0 || 2L * shared < shorter)
    throw InsufficientOverlap("series share " + std::to_string(shared) + " of " + std::to_string(shorter) +
                              " columns");
  return (a.y.segment(lo - a.x0, shared) - b.y.segment(lo - b.x0, shared)).cwiseAbs().mean();
}

double MatchResult::total_distance() const {
  double s = 0;
  for (const auto& p : pairs) s += p.distance;
  return s;
}

// Shortest augmenting path (Jonker-Volgenant style potentials), O(n^2 m).
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows()), m = static_cast<int>(cost.cols());
  if (n > m) throw std::invalid_argument("solve_assignment: more rows than columns");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0), v(m + 1, 0);
  std::vector<int> owner(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    owner[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = owner[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const int j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (owner[j] > 0) row_to_col[owner[j] - 1] = j - 1;
  return row_to_col;
}

MatchResult match_lines(const std::vector<Series>& preds, const std::vector<Series>& gts, double eps_p) {
  if (!(eps_p > 0)) throw std::invalid_argument("match_lines: eps_p must be positive");
  MatchResult r;
  r.eps_p = eps_p;
  const int np = static_cast<int>(preds.size()), ng = static_cast<int>(gts.size());
  const int n = std::max(np, ng);

  std::vector<std::vector<std::optional<double>>> dist(np, std::vector<std::optional<double>>(ng));
  double d_max = 0;
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < ng; ++j) {
      try {
        const double d = line_distance(preds[i], gts[j]);
        if (d < eps_p) {
          dist[i][j] = d;
          d_max = std::max(d_max, d);
        }
      } catch (const InsufficientOverlap&) {
      }
    }
  // Forbidden and padding cells cost more than any full set of allowed
  // pairs, so the optimum first maximizes the match count. Bounded by the
  // largest allowed distance rather than eps_p, which may be huge.
  const double big = 1.0 + n * d_max;
  Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, big);
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < ng; ++j)
      if (dist[i][j]) cost(i, j) = *dist[i][j];

  std::vector<char> pred_used(np, 0), gt_used(ng, 0);
  if (n > 0) {
    const std::vector<int> assign = solve_assignment(cost);
    for (int i = 0; i < np; ++i) {
      const int j = assign[i];
      if (j < ng && dist[i][j]) {
        r.pairs.push_back({preds[i].id, gts[j].id, *dist[i][j]});
        pred_used[i] = gt_used[j] = 1;
      }
    }
  }
  std::sort(r.pairs.begin(), r.pairs.end(), [](const auto& a, const auto& b) { return a.gt_id < b.gt_id; });
  for (int i = 0; i < np; ++i)
    if (!pred_used[i]) r.unmatched_pred.push_back(preds[i].id);
  for (int j = 0; j < ng; ++j)
    if (!gt_used[j]) r.unmatched_gt.push_back(gts[j].id);
  return r;
}

std::vector<PRPoint> pr_curve(const std::vector<ImageLines>& images, const std::vector<double>& eps_list) {
  std::vector<PRPoint> out;
  for (double eps : eps_list) {
    PRPoint pt;
    pt.eps_p = eps;
    for (const auto& im : images) {
      pt.matched += match_lines(im.preds, im.gts, eps).pairs.size();
      pt.n_pred += im.preds.size();
      pt.n_gt += im.gts.size();
    }
    out.push_back(pt);
  }
  return out;
}

MisalignmentReport misalignment(const std::vector<Eigen::Vector2d>& pred, const std::vector<Eigen::Vector2d>& gt) {
  if (pred.size() != gt.size())
    throw LengthMismatch("misalignment: " + std::to_string(pred.size()) + " predicted origins vs " +
                         std::to_string(gt.size()) + " ground-truth origins");
  MisalignmentReport r;
  for (std::size_t i = 0; i < pred.size(); ++i) r.per_image.push_back((pred[i] - gt[i]).cwiseAbs().sum());
  if (!r.per_image.empty()) {
    for (double d : r.per_image) r.mean += d;
    r.mean /= double(r.per_image.size());
  }
  return r;
}

}  // namespace plotdigit::eval
