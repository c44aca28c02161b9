#pragma once

#include "wbound/types.hpp"

#include <functional>
#include <vector>

namespace wbound::lp {

enum class Status { Optimal, Infeasible, Unbounded };

const char* status_name(Status status) noexcept;

struct Constraint {
  Vector coeffs;
  double rhs = 0.0;
};

/// maximize  objective . x
/// s.t.      a . x <= b  for every inequality
///           a . x == b  for every equality
///           lower <= x <= upper
///
/// Lower bounds default to 0 and must be finite; upper bounds default to +inf.
struct LinearProgram {
  explicit LinearProgram(Vector objective);

  std::size_t variables() const noexcept { return static_cast<std::size_t>(objective.size()); }
  void add_inequality(Vector coeffs, double rhs);
  void add_equality(Vector coeffs, double rhs);

  Vector objective;
  std::vector<Constraint> inequalities;
  std::vector<Constraint> equalities;
  Vector lower;
  Vector upper;
};

struct Solution {
  Status status = Status::Infeasible;
  Vector x;
  double value = 0.0;
  /// Row multipliers y with objective = A^T y + reduced_costs. Inequality
  /// multipliers are >= 0 at an optimum.
  Vector inequality_duals;
  Vector equality_duals;
  /// objective - A^T y per variable; non-zero only for variables resting on a
  /// bound. Strong duality reads  c.x = b.y + reduced_costs.x.
  Vector reduced_costs;
  /// Unbounded: improving direction in x-space.
  Vector ray;
  /// Infeasible: phase-one row multipliers (inequalities then equalities).
  Vector farkas;
  std::size_t iterations = 0;
};

struct Options {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-9;
  double pivot_tolerance = 1e-10;
  /// 0 picks a cap proportional to the tableau size.
  std::size_t max_iterations = 0;
};

/// Bounded-variable primal simplex on a dense tableau (two phases). Pricing
/// is Dantzig's rule, switching to Bland's rule after 5*(rows+cols)
/// iterations. Throws `Error(NumericalFailure)` when the iteration cap is hit.
Solution solve(const LinearProgram& program, const Options& options = {});

/// Returns the rows violated by a candidate point (empty when it is feasible
/// for the full constraint set).
using Separator = std::function<std::vector<Constraint>(const Vector& x)>;

/// Solves `program`, appends the rows reported by `separate` and re-solves
/// until no row is violated. On return `program` holds the generated rows, so
/// the duals of the solution line up with `program.inequalities`. The starting
/// program must be bounded on its own.
Solution solve_with_row_generation(LinearProgram& program, const Separator& separate,
                                   const Options& options = {});

}  // namespace wbound::lp
