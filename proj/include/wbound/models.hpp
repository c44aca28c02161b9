#pragma once

#include "wbound/markov.hpp"
#include "wbound/metric.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace wbound {

struct ChainModel {
  Generator Q;
  Metric metric;
};

/// The 3-state example chain Q = [[-1,0,1],[1,-4,3],[0,2,-2]] with
/// d(1,2) = 1, d(1,3) = 5, d(2,3) = 4.
ChainModel toy_ctmc();
/// Same generator under the discrete metric.
ChainModel toy_ctmc_discrete();

struct Box {
  std::vector<long> lo;
  std::vector<long> hi;

  std::size_t dimension() const noexcept { return lo.size(); }
  std::size_t states() const;
};

struct Jump {
  std::vector<long> offset;
  double probability = 0.0;
};

struct RootLink {
  State root;
  double rate;
};

struct LatticeModel {
  Generator Q;
  Metric metric;
  /// Integer coordinates of every state, in index order.
  std::vector<std::vector<long>> points;
};

/// Chain on the integer points of a box that jumps by J ~ `jumps` at rate
/// lambda and projects back onto the box coordinate-wise. States are indexed
/// lexicographically, last coordinate fastest; the metric is Euclidean.
/// With `root`, every other state also moves to the root state at the given
/// extra rate.
LatticeModel translation_invariant_ctmc(const Box& box, double lambda, const std::vector<Jump>& jumps,
                                        std::optional<RootLink> root = std::nullopt);

/// Parses "0:4,0:4" into a box.
Box parse_box(const std::string& text);
/// Parses "1,0:0.25;-1,0:0.25" into jumps (offset:probability, ';'-separated).
std::vector<Jump> parse_jumps(const std::string& text);

enum class MetricKind { Discrete, Line, Graph };

struct RandomInstance {
  Generator Q;
  Metric metric;
  ProbVec p0;
};

/// Reproducible random chain: off-diagonal rates uniform in [0.1, 2], each
/// kept with probability `density` (at least one exit per state); a metric
/// of the requested kind; and a random initial distribution.
RandomInstance random_instance(std::size_t n, std::uint64_t seed, MetricKind kind, double density = 1.0);

}  // namespace wbound
