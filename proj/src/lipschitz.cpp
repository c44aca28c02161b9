#include "lipschitz.hpp"

#include "wbound/error.hpp"

#include <algorithm>
#include <cmath>

namespace wbound::detail {

namespace {

constexpr double kCutTolerance = 1e-10;

std::vector<State> support_of(const Metric& m, const PotentialProgram& program, bool prune) {
  const std::size_t n = m.size();
  if (!prune) {
    std::vector<State> all(n);
    for (State s = 0; s < n; ++s) all[s] = s;
    return all;
  }
  std::vector<bool> used(n, false);
  for (State s = 0; s < n; ++s) {
    if (program.objective(s) != 0.0) used[s] = true;
    for (const auto& row : program.rows) {
      if (row.coeffs(s) != 0.0) used[s] = true;
    }
  }
  for (State s : program.include) used.at(s) = true;
  std::vector<State> support;
  for (State s = 0; s < n; ++s) {
    if (used[s]) support.push_back(s);
  }
  return support;
}

Vector lipschitz_row(std::size_t k, std::size_t a, std::size_t b) {
  Vector row = Vector::Zero(static_cast<Eigen::Index>(k));
  row(a) = 1.0;
  row(b) = -1.0;
  return row;
}

}  // namespace

PotentialSolution maximize_potential(const Metric& m, const PotentialProgram& program, bool prune) {
  const std::size_t n = m.size();
  if (static_cast<std::size_t>(program.objective.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "objective length does not match the metric");
  }
  for (const auto& row : program.rows) {
    if (static_cast<std::size_t>(row.coeffs.size()) != n) {
      throw Error(ErrorCode::DimensionMismatch, "row length does not match the metric");
    }
  }

  const std::vector<State> support = support_of(m, program, prune);
  const std::size_t k = support.size();
  PotentialSolution out;
  if (k == 0) {
    out.status = lp::Status::Optimal;
    out.f = Vector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& row : program.rows) {
      const bool ok = row.equality ? std::abs(row.rhs) <= 1e-12 : row.rhs >= -1e-12;
      if (!ok) out.status = lp::Status::Infeasible;
    }
    return out;
  }

  auto restrict = [&](const Vector& full) {
    Vector v(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) v(i) = full(support[i]);
    return v;
  };

  const double d_max = m.diameter();
  lp::LinearProgram lp(restrict(program.objective));
  lp.upper.setConstant(d_max);
  for (const auto& row : program.rows) {
    if (row.equality) {
      lp.add_equality(restrict(row.coeffs), row.rhs);
    } else {
      lp.add_inequality(restrict(row.coeffs), row.rhs);
    }
  }

  lp::Solution sol;
  if (k <= kDenseLipschitzLimit) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (a != b) lp.add_inequality(lipschitz_row(k, a, b), m(support[a], support[b]));
      }
    }
    sol = lp::solve(lp);
  } else {
    auto separate = [&](const Vector& f) {
      std::vector<lp::Constraint> cuts;
      for (std::size_t a = 0; a < k; ++a) {
        std::size_t worst = k;
        double excess = kCutTolerance;
        for (std::size_t b = 0; b < k; ++b) {
          if (a == b) continue;
          const double e = f(a) - f(b) - m(support[a], support[b]);
          if (e > excess) {
            excess = e;
            worst = b;
          }
        }
        if (worst < k) cuts.push_back({lipschitz_row(k, a, worst), m(support[a], support[worst])});
      }
      return cuts;
    };
    sol = lp::solve_with_row_generation(lp, separate);
  }

  out.status = sol.status;
  if (sol.status != lp::Status::Optimal) return out;
  out.value = sol.value;

  Vector f = Vector::Constant(static_cast<Eigen::Index>(n), d_max);
  for (std::size_t i = 0; i < k; ++i) f(support[i]) = std::clamp(sol.x(i), 0.0, d_max);
  if (k < n) {
    std::vector<bool> inside(n, false);
    for (State s : support) inside[s] = true;
    for (State x = 0; x < n; ++x) {
      if (inside[x]) continue;
      double g = d_max;
      for (State u : support) g = std::min(g, f(u) + m(u, x));
      f(x) = g;
    }
  }
  out.f = std::move(f);
  return out;
}

}  // namespace wbound::detail
