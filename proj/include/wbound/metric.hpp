#pragma once

#include "wbound/types.hpp"

#include <span>
#include <vector>

namespace wbound {

/// Finite metric on states 0..n-1, stored as a dense distance matrix.
///
/// Every instance satisfies the metric axioms (zero diagonal, symmetry,
/// strictly positive off-diagonal entries, triangle inequality up to an
/// absolute 1e-9). Pseudometrics are rejected because curvature divides by
/// d(r,s).
class Metric {
 public:
  static constexpr double kTriangleTolerance = 1e-9;

  /// Checks the metric axioms and throws `Error` naming the first offending
  /// pair or triple.
  static Metric validate(Matrix dist);

  std::size_t size() const noexcept { return static_cast<std::size_t>(dist_.rows()); }
  double operator()(State r, State s) const { return dist_(r, s); }
  const Matrix& distances() const noexcept { return dist_; }
  /// d_max, the largest pairwise distance (0 for a single state).
  double diameter() const noexcept { return d_max_; }
  /// Distances from r to every state, i.e. the column d(r, .).
  Vector from(State r) const { return dist_.row(r).transpose(); }

 private:
  Metric(Matrix dist, double d_max) : dist_(std::move(dist)), d_max_(d_max) {}

  Matrix dist_;
  double d_max_ = 0.0;
};

/// d(r,s) = 1 for r != s.
Metric discrete_metric(std::size_t n);

/// d(r,s) = |x_r - x_s|; positions must be finite and pairwise distinct.
Metric line_metric(std::span<const double> positions);

struct WeightedEdge {
  State from;
  State to;
  double weight;
};

/// All-pairs shortest paths over an undirected graph with positive weights.
Metric shortest_path_metric(std::size_t n, std::span<const WeightedEdge> edges);

struct WeightedMetric {
  Metric metric;
  double weight;
};

/// Weighted sum of component metrics on the Cartesian product of the
/// component state spaces. Product states are indexed lexicographically with
/// the last component varying fastest.
Metric product_metric(std::span<const WeightedMetric> components);

}  // namespace wbound
