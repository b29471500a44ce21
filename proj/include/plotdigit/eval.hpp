#pragma once

// Matched-line precision/recall and axis-origin misalignment.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace plotdigit::eval {

/// A line sampled at consecutive columns x0, x0 + 1, ...
struct Series {
  int id = 0;
  int x0 = 0;
  Eigen::VectorXd y;

  int x1() const { return x0 + static_cast<int>(y.size()); }
};

/// Mean |a.y - b.y| over shared columns. Throws InsufficientOverlap when the
/// shared columns cover less than half of the shorter series.
double line_distance(const Series& a, const Series& b);

struct MatchedPair {
  int pred_id;
  int gt_id;
  double distance;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;  ///< sorted by gt id
  std::vector<int> unmatched_pred;
  std::vector<int> unmatched_gt;
  double eps_p = 0;

  double total_distance() const;
};

/// One-to-one assignment over pairs closer than eps_p: the largest number of
/// matches, and among those the smallest total distance.
MatchResult match_lines(const std::vector<Series>& preds, const std::vector<Series>& gts, double eps_p);

/// Rectangular min-cost assignment. Returns, for each row, its column.
/// rows <= cols is required.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

/// Counts are kept so that precision and recall stay exact ratios.
struct PRPoint {
  double eps_p = 0;
  std::size_t matched = 0;
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;

  double precision() const { return n_pred ? double(matched) / double(n_pred) : 1.0; }
  double recall() const { return n_gt ? double(matched) / double(n_gt) : 1.0; }
};

struct ImageLines {
  std::vector<Series> preds;
  std::vector<Series> gts;
};

/// One point per eps_p, counts pooled over all images.
std::vector<PRPoint> pr_curve(const std::vector<ImageLines>& images, const std::vector<double>& eps_list);

struct MisalignmentReport {
  std::vector<double> per_image;  ///< |x_pred - x_gt| + |y_pred - y_gt|
  double mean = 0;
};

/// Throws LengthMismatch.
MisalignmentReport misalignment(const std::vector<Eigen::Vector2d>& pred, const std::vector<Eigen::Vector2d>& gt);

}  // namespace plotdigit::eval
