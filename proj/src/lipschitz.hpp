#pragma once

// Maximization over feasible potentials: 1-Lipschitz f with 0 <= f <= d_max,
// plus caller-supplied linear rows. Shared by the transport and curvature code.

#include "wbound/lp.hpp"
#include "wbound/metric.hpp"

#include <vector>

namespace wbound::detail {

struct PotentialRow {
  Vector coeffs;  // over all n states
  double rhs = 0.0;
  bool equality = false;
};

struct PotentialProgram {
  Vector objective;  // over all n states
  std::vector<PotentialRow> rows;
  std::vector<State> include;
};

struct PotentialSolution {
  lp::Status status = lp::Status::Infeasible;
  Vector f;
  double value = 0.0;
};

// Above this many support states the Lipschitz rows are generated lazily.
inline constexpr std::size_t kDenseLipschitzLimit = 24;

// With `prune`, the LP only involves the states touched by the objective,
// the rows and `include`; the optimum is extended to the other states by
// g(x) = min(d_max, min_u f(u) + d(u,x)), which keeps it feasible.
PotentialSolution maximize_potential(const Metric& m, const PotentialProgram& program,
                                     bool prune = true);

}  // namespace wbound::detail
