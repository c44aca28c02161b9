#include "wbound/lp.hpp"

#include "wbound/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wbound::lp {

const char* status_name(Status status) noexcept {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

LinearProgram::LinearProgram(Vector objective_)
    : objective(std::move(objective_)),
      lower(Vector::Zero(objective.size())),
      upper(Vector::Constant(objective.size(), kInfinity)) {}

void LinearProgram::add_inequality(Vector coeffs, double rhs) {
  inequalities.push_back({std::move(coeffs), rhs});
}

void LinearProgram::add_equality(Vector coeffs, double rhs) {
  equalities.push_back({std::move(coeffs), rhs});
}

namespace {

enum class Bound : unsigned char { Lower, Upper, Basic };

// Dense tableau over the shifted variables y = x - lower, with one slack per
// inequality row and one artificial per row whose slack cannot start basic.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const Options& options) : options_(options) {
    nv_ = lp.variables();
    mi_ = lp.inequalities.size();
    m_ = mi_ + lp.equalities.size();

    sign_.assign(m_, 1.0);
    std::vector<double> rhs(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const Constraint& row = constraint(lp, i);
      rhs[i] = row.rhs - row.coeffs.dot(lp.lower);
      if (rhs[i] < 0.0) sign_[i] = -1.0;
    }

    // Rows whose own slack can start basic need no artificial.
    std::vector<std::size_t> needs_artificial;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i >= mi_ || sign_[i] < 0.0) needs_artificial.push_back(i);
    }
    first_artificial_ = nv_ + mi_;
    cols_ = first_artificial_ + needs_artificial.size();

    T_ = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(cols_));
    upper_ = Vector::Constant(static_cast<Eigen::Index>(cols_), kInfinity);
    value_ = Vector::Zero(static_cast<Eigen::Index>(cols_));
    state_.assign(cols_, Bound::Lower);
    basis_.assign(m_, 0);
    initial_column_.assign(m_, 0);

    for (std::size_t j = 0; j < nv_; ++j) upper_(j) = lp.upper(j) - lp.lower(j);
    for (std::size_t i = 0; i < m_; ++i) {
      const Constraint& row = constraint(lp, i);
      T_.row(i).head(nv_) = sign_[i] * row.coeffs.transpose();
      if (i < mi_) T_(i, nv_ + i) = sign_[i];
    }
    for (std::size_t i = 0; i < mi_; ++i) initial_column_[i] = nv_ + i;
    for (std::size_t k = 0; k < needs_artificial.size(); ++k) {
      const std::size_t i = needs_artificial[k];
      T_(i, first_artificial_ + k) = 1.0;
      initial_column_[i] = first_artificial_ + k;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = initial_column_[i];
      state_[basis_[i]] = Bound::Basic;
      value_(basis_[i]) = sign_[i] * rhs[i];
    }

    const std::size_t size = m_ + cols_;
    bland_after_ = 5 * size;
    max_iterations_ = options.max_iterations ? options.max_iterations : 50 * size + 1000;
  }

  static const Constraint& constraint(const LinearProgram& lp, std::size_t i) {
    return i < lp.inequalities.size() ? lp.inequalities[i] : lp.equalities[i - lp.inequalities.size()];
  }

  bool has_artificials() const { return cols_ > first_artificial_; }

  void set_costs(const Vector& costs) {
    cost_ = costs;
    reduced_ = cost_;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost_(basis_[i]);
      if (cb != 0.0) reduced_ -= cb * T_.row(i).transpose();
    }
  }

  Vector phase_one_costs() const {
    Vector c = Vector::Zero(cols_);
    for (std::size_t j = first_artificial_; j < cols_; ++j) c(j) = -1.0;
    return c;
  }

  Vector phase_two_costs(const Vector& objective) const {
    Vector c = Vector::Zero(cols_);
    c.head(nv_) = objective;
    return c;
  }

  double objective_value() const { return cost_.dot(value_); }

  // Runs the simplex loop for the current costs. Returns false on unboundedness,
  // leaving the improving direction in `ray_`.
  bool optimize() {
    while (true) {
      if (iterations_ >= max_iterations_) {
        throw Error(ErrorCode::NumericalFailure,
                    "simplex iteration cap " + std::to_string(max_iterations_) + " reached");
      }
      const bool bland = iterations_ >= bland_after_;
      const std::size_t q = choose_entering(bland);
      if (q == kNone) return true;
      ++iterations_;

      const double dir = state_[q] == Bound::Lower ? 1.0 : -1.0;
      double theta = upper_(q);
      std::size_t leave_row = kNone;
      Bound leave_to = Bound::Lower;
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        const double alpha = T_(i, q);
        if (std::abs(alpha) <= options_.pivot_tolerance) continue;
        const double rate = -dir * alpha;  // d x_B(i) / d theta
        const std::size_t b = basis_[i];
        double limit;
        Bound target;
        if (rate < 0.0) {
          limit = std::max(value_(b), 0.0) / -rate;
          target = Bound::Lower;
        } else {
          if (upper_(b) == kInfinity) continue;
          limit = std::max(upper_(b) - value_(b), 0.0) / rate;
          target = Bound::Upper;
        }
        bool take = false;
        if (limit < theta - 1e-12 || (leave_row == kNone && limit <= theta)) {
          take = true;
        } else if (leave_row != kNone && limit <= theta + 1e-12) {
          take = bland ? basis_[i] < basis_[leave_row] : std::abs(alpha) > best_pivot;
        }
        if (take) {
          theta = std::min(theta, limit);
          leave_row = i;
          leave_to = target;
          best_pivot = std::abs(alpha);
        }
      }

      if (theta == kInfinity) {
        ray_ = Vector::Zero(cols_);
        ray_(q) = dir;
        for (std::size_t i = 0; i < m_; ++i) ray_(basis_[i]) = -dir * T_(i, q);
        return false;
      }

      value_(q) += dir * theta;
      for (std::size_t i = 0; i < m_; ++i) value_(basis_[i]) -= dir * theta * T_(i, q);

      if (leave_row == kNone) {
        // bound flip
        state_[q] = state_[q] == Bound::Lower ? Bound::Upper : Bound::Lower;
        value_(q) = state_[q] == Bound::Lower ? 0.0 : upper_(q);
        continue;
      }

      const std::size_t leaving = basis_[leave_row];
      state_[leaving] = leave_to;
      value_(leaving) = leave_to == Bound::Lower ? 0.0 : upper_(leaving);
      pivot(leave_row, q);
    }
  }

  // After phase one: fix artificials at zero and pivot basic ones out where a
  // structural or slack column can replace them.
  void retire_artificials() {
    for (std::size_t j = first_artificial_; j < cols_; ++j) {
      upper_(j) = 0.0;
      if (state_[j] != Bound::Basic) {
        state_[j] = Bound::Lower;
        value_(j) = 0.0;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < first_artificial_) continue;
      std::size_t best = kNone;
      double best_abs = 1e-9;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (state_[j] == Bound::Basic) continue;
        const double a = std::abs(T_(i, j));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      if (best == kNone) continue;  // redundant row
      const std::size_t art = basis_[i];
      state_[art] = Bound::Lower;
      value_(art) = 0.0;
      pivot(i, best);
    }
  }

  Vector structural_values(const LinearProgram& lp) const {
    Vector x = lp.lower;
    for (std::size_t j = 0; j < nv_; ++j) x(j) += value_(j);
    return x;
  }

  Vector row_duals() const {
    Vector y(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      y(i) = sign_[i] * (cost_(initial_column_[i]) - reduced_(initial_column_[i]));
    }
    return y;
  }

  Vector structural_reduced_costs() const { return reduced_.head(nv_); }
  Vector structural_ray() const { return ray_.head(nv_); }
  std::size_t iterations() const { return iterations_; }
  std::size_t inequality_rows() const { return mi_; }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t choose_entering(bool bland) const {
    std::size_t best = kNone;
    double best_score = options_.optimality_tolerance;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (state_[j] == Bound::Basic || upper_(j) == 0.0) continue;
      const double d = reduced_(j);
      const double score = state_[j] == Bound::Lower ? d : -d;
      if (score <= options_.optimality_tolerance) continue;
      if (bland) return j;
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t q) {
    const double p = T_(r, q);
    T_.row(r) /= p;
    T_(r, q) = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double factor = T_(i, q);
      if (factor == 0.0) continue;
      T_.row(i) -= factor * T_.row(r);
      T_(i, q) = 0.0;
    }
    const double dq = reduced_(q);
    if (dq != 0.0) {
      reduced_ -= dq * T_.row(r).transpose();
      reduced_(q) = 0.0;
    }
    basis_[r] = q;
    state_[q] = Bound::Basic;
  }

  Options options_;
  std::size_t nv_ = 0, mi_ = 0, m_ = 0, cols_ = 0, first_artificial_ = 0;
  std::vector<double> sign_;
  Matrix T_;
  Vector upper_, value_, cost_, reduced_, ray_;
  std::vector<Bound> state_;
  std::vector<std::size_t> basis_, initial_column_;
  std::size_t iterations_ = 0, bland_after_ = 0, max_iterations_ = 0;
};

void check_program(const LinearProgram& lp) {
  const auto n = static_cast<Eigen::Index>(lp.variables());
  if (lp.lower.size() != n || lp.upper.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "bound vectors do not match the objective");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lower(j))) {
      throw Error(ErrorCode::InvalidArgument, "lower bounds must be finite");
    }
    if (lp.upper(j) < lp.lower(j)) {
      throw Error(ErrorCode::InvalidArgument, "upper bound below lower bound",
                  {static_cast<std::size_t>(j)});
    }
  }
  auto check_rows = [n](const std::vector<Constraint>& rows) {
    for (const auto& row : rows) {
      if (row.coeffs.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "constraint row has " +
                                                      std::to_string(row.coeffs.size()) +
                                                      " coefficients, expected " + std::to_string(n));
      }
    }
  };
  check_rows(lp.inequalities);
  check_rows(lp.equalities);
}

}  // namespace

Solution solve(const LinearProgram& program, const Options& options) {
  check_program(program);
  Tableau tableau(program, options);
  Solution solution;
  const std::size_t mi = program.inequalities.size();

  if (tableau.has_artificials()) {
    tableau.set_costs(tableau.phase_one_costs());
    tableau.optimize();
    double scale = 1.0;
    for (std::size_t i = 0; i < mi + program.equalities.size(); ++i) {
      scale = std::max(scale, std::abs(Tableau::constraint(program, i).rhs));
    }
    if (tableau.objective_value() < -options.feasibility_tolerance * scale) {
      solution.status = Status::Infeasible;
      const Vector y = tableau.row_duals();
      solution.farkas = y;
      solution.iterations = tableau.iterations();
      return solution;
    }
    tableau.retire_artificials();
  }

  tableau.set_costs(tableau.phase_two_costs(program.objective));
  const bool bounded = tableau.optimize();
  solution.iterations = tableau.iterations();
  solution.x = tableau.structural_values(program);
  if (!bounded) {
    solution.status = Status::Unbounded;
    solution.ray = tableau.structural_ray();
    solution.value = kInfinity;
    return solution;
  }
  solution.status = Status::Optimal;
  solution.value = program.objective.dot(solution.x);
  const Vector y = tableau.row_duals();
  solution.inequality_duals = y.head(static_cast<Eigen::Index>(mi));
  solution.equality_duals = y.tail(static_cast<Eigen::Index>(program.equalities.size()));
  solution.reduced_costs = tableau.structural_reduced_costs();
  return solution;
}

Solution solve_with_row_generation(LinearProgram& program, const Separator& separate,
                                   const Options& options) {
  std::size_t total_iterations = 0;
  // Every round adds at least one row that cuts off the previous optimum.
  const std::size_t max_rounds = 10000;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    Solution solution = solve(program, options);
    total_iterations += solution.iterations;
    if (solution.status != Status::Optimal) {
      solution.iterations = total_iterations;
      return solution;
    }
    std::vector<Constraint> cuts = separate(solution.x);
    if (cuts.empty()) {
      solution.iterations = total_iterations;
      return solution;
    }
    for (auto& cut : cuts) program.inequalities.push_back(std::move(cut));
  }
  throw Error(ErrorCode::NumericalFailure, "row generation did not converge");
}

}  // namespace wbound::lp
