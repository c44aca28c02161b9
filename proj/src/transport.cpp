#include "wbound/transport.hpp"

#include "wbound/error.hpp"
#include "wbound/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wbound {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr double kDust = 1e-15;

struct Restricted {
  std::vector<State> rows;
  std::vector<State> cols;
  Vector a;
  Vector b;
  Matrix cost;
};

struct Plan {
  Matrix flow;  // rows x cols
  Vector v;     // column potentials, u_i + v_j <= cost(i,j)
};

// Transportation simplex: north-west corner start, MODI potentials, pivots
// along the unique cycle of the basis tree. Returns false when the iteration
// cap is hit (degenerate cycling), letting the caller fall back to the LP.
bool transportation_simplex(const Restricted& in, Plan& plan) {
  const std::size_t m = in.rows.size();
  const std::size_t k = in.cols.size();
  const std::size_t nodes = m + k;
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  std::vector<std::pair<std::size_t, std::size_t>> basis;
  basis.reserve(nodes - 1);

  {
    Vector ra = in.a;
    Vector rb = in.b;
    std::size_t i = 0, j = 0;
    while (true) {
      const double amount = std::max(0.0, std::min(ra(i), rb(j)));
      x(i, j) = amount;
      basis.emplace_back(i, j);
      ra(i) -= amount;
      rb(j) -= amount;
      if (i == m - 1 && j == k - 1) break;
      if (i == m - 1) {
        ++j;
      } else if (j == k - 1) {
        ++i;
      } else if (ra(i) <= rb(j)) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const double scale = std::max(1.0, in.cost.cwiseAbs().maxCoeff());
  const double tolerance = 1e-11 * scale;
  const std::size_t cap = 20 * m * k + 1000;

  std::vector<std::vector<std::size_t>> adjacent(nodes);  // basis indices per node
  std::vector<double> potential(nodes);
  std::vector<bool> seen(nodes);
  std::vector<std::size_t> parent_edge(nodes), order;
  order.reserve(nodes);

  auto other = [m](const std::pair<std::size_t, std::size_t>& cell, std::size_t node) {
    return node < m ? m + cell.second : cell.first;
  };

  for (std::size_t iteration = 0;; ++iteration) {
    for (auto& list : adjacent) list.clear();
    for (std::size_t e = 0; e < basis.size(); ++e) {
      adjacent[basis[e].first].push_back(e);
      adjacent[m + basis[e].second].push_back(e);
    }

    // Potentials by a traversal of the basis tree from row 0.
    std::fill(seen.begin(), seen.end(), false);
    order.clear();
    order.push_back(0);
    seen[0] = true;
    potential[0] = 0.0;
    for (std::size_t head = 0; head < order.size(); ++head) {
      const std::size_t node = order[head];
      for (std::size_t e : adjacent[node]) {
        const std::size_t next = other(basis[e], node);
        if (seen[next]) continue;
        seen[next] = true;
        potential[next] = in.cost(basis[e].first, basis[e].second) - potential[node];
        order.push_back(next);
      }
    }
    if (order.size() != nodes) return false;

    std::size_t ei = 0, ej = 0;
    double best = tolerance;
    bool entering = false;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double gain = potential[i] + potential[m + j] - in.cost(i, j);
        if (gain > best) {
          best = gain;
          ei = i;
          ej = j;
          entering = true;
        }
      }
    }
    if (!entering) break;
    if (iteration >= cap) return false;

    // Tree path from column ej back to row ei.
    std::fill(seen.begin(), seen.end(), false);
    order.clear();
    order.push_back(ei);
    seen[ei] = true;
    for (std::size_t head = 0; head < order.size() && !seen[m + ej]; ++head) {
      const std::size_t node = order[head];
      for (std::size_t e : adjacent[node]) {
        const std::size_t next = other(basis[e], node);
        if (seen[next]) continue;
        seen[next] = true;
        parent_edge[next] = e;
        order.push_back(next);
      }
    }
    std::vector<std::size_t> path;
    for (std::size_t node = m + ej; node != ei;) {
      const std::size_t e = parent_edge[node];
      path.push_back(e);
      node = other(basis[e], node);
    }

    // Edges at even positions lose flow, odd positions gain.
    std::size_t leaving = path[0];
    double theta = kInfinity;
    for (std::size_t pos = 0; pos < path.size(); pos += 2) {
      const auto& cell = basis[path[pos]];
      if (x(cell.first, cell.second) < theta) {
        theta = x(cell.first, cell.second);
        leaving = path[pos];
      }
    }
    x(ei, ej) += theta;
    for (std::size_t pos = 0; pos < path.size(); ++pos) {
      const auto& cell = basis[path[pos]];
      x(cell.first, cell.second) += pos % 2 == 0 ? -theta : theta;
    }
    x(basis[leaving].first, basis[leaving].second) = 0.0;
    basis[leaving] = {ei, ej};
  }

  plan.flow = x.cwiseMax(0.0);
  plan.v.resize(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) plan.v(j) = potential[m + j];
  return true;
}

Plan coupling_lp(const Restricted& in) {
  const std::size_t m = in.rows.size();
  const std::size_t k = in.cols.size();
  const auto cells = static_cast<Eigen::Index>(m * k);
  Vector objective(cells);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) objective(i * k + j) = -in.cost(i, j);
  }
  lp::LinearProgram program(objective);
  for (std::size_t i = 0; i < m; ++i) {
    Vector row = Vector::Zero(cells);
    for (std::size_t j = 0; j < k; ++j) row(i * k + j) = 1.0;
    program.add_equality(std::move(row), in.a(i));
  }
  for (std::size_t j = 0; j < k; ++j) {
    Vector row = Vector::Zero(cells);
    for (std::size_t i = 0; i < m; ++i) row(i * k + j) = 1.0;
    program.add_equality(std::move(row), in.b(j));
  }
  const lp::Solution sol = lp::solve(program);
  if (sol.status != lp::Status::Optimal) {
    throw Error(ErrorCode::NumericalFailure,
                std::string("coupling LP ended ") + lp::status_name(sol.status));
  }
  Plan plan;
  plan.flow.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < k; ++j) plan.flow(i, j) = std::max(0.0, sol.x(i * k + j));
  }
  plan.v = -sol.equality_duals.tail(static_cast<Eigen::Index>(k));
  return plan;
}

void check_masses(const Vector& mass, const char* what) {
  for (Eigen::Index s = 0; s < mass.size(); ++s) {
    if (!std::isfinite(mass(s)) || mass(s) < 0.0) {
      throw Error(ErrorCode::InvalidDistribution, std::string(what) + " has a negative or non-finite entry",
                  {static_cast<std::size_t>(s)});
    }
  }
}

}  // namespace

Transport transport_masses(const Vector& supply, const Vector& demand, const Metric& m,
                           TransportMethod method) {
  const std::size_t n = m.size();
  if (static_cast<std::size_t>(supply.size()) != n || static_cast<std::size_t>(demand.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch,
                "mass vectors of length " + std::to_string(supply.size()) + " and " +
                    std::to_string(demand.size()) + " on a metric with " + std::to_string(n) +
                    " states");
  }
  check_masses(supply, "supply");
  check_masses(demand, "demand");
  const double total_a = supply.sum();
  const double total_b = demand.sum();
  if (std::abs(total_a - total_b) > kMassTolerance * std::max(1.0, total_a)) {
    throw Error(ErrorCode::InvalidDistribution, "supply and demand totals differ");
  }

  Transport out;
  out.coupling = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  out.potential = Vector::Zero(static_cast<Eigen::Index>(n));
  if (total_a <= 0.0 || total_b <= 0.0) return out;

  // Only states carrying mass enter the problem.
  Restricted in;
  for (State s = 0; s < n; ++s) {
    if (supply(s) > 0.0) in.rows.push_back(s);
    if (demand(s) > 0.0) in.cols.push_back(s);
  }
  const std::size_t rows = in.rows.size();
  const std::size_t cols = in.cols.size();
  in.a.resize(static_cast<Eigen::Index>(rows));
  in.b.resize(static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) in.a(i) = supply(in.rows[i]);
  for (std::size_t j = 0; j < cols; ++j) in.b(j) = demand(in.cols[j]) * (total_a / total_b);
  in.cost.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) in.cost(i, j) = m(in.rows[i], in.cols[j]);
  }

  Plan plan;
  if (method == TransportMethod::GenericLp || !transportation_simplex(in, plan)) {
    plan = coupling_lp(in);
  }

  double value = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      out.coupling(in.rows[i], in.cols[j]) = plan.flow(i, j);
      value += plan.flow(i, j) * in.cost(i, j);
    }
  }

  // c-transform of the column potentials: 1-Lipschitz on every state and at
  // least as good as the LP multipliers.
  for (State x = 0; x < n; ++x) {
    double g = kInfinity;
    for (std::size_t j = 0; j < cols; ++j) g = std::min(g, m(x, in.cols[j]) - plan.v(j));
    out.potential(x) = g;
  }
  out.potential.array() -= out.potential.minCoeff();
  out.value = value;
  out.coupling = canonicalize_coupling(out.coupling, m);
  return out;
}

Transport wasserstein(const ProbVec& p, const ProbVec& q, const Metric& m, TransportMethod method) {
  if (p.size() != q.size() || p.size() != m.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "distributions of length " + std::to_string(p.size()) + " and " +
                    std::to_string(q.size()) + " on a metric with " + std::to_string(m.size()) +
                    " states");
  }
  return transport_masses(p.mass(), q.mass(), m, method);
}

double wasserstein_signed(const Vector& row, const Metric& m) {
  if (static_cast<std::size_t>(row.size()) != m.size()) {
    throw Error(ErrorCode::DimensionMismatch, "row length does not match the metric");
  }
  const double scale = std::max(1.0, row.lpNorm<1>());
  if (!row.allFinite() || std::abs(row.sum()) > kMassTolerance * scale) {
    throw Error(ErrorCode::RowSumNotZero, "row sums to " + std::to_string(row.sum()));
  }
  const Vector positive = row.cwiseMax(0.0);
  const Vector negative = (-row).cwiseMax(0.0);
  if (positive.sum() == 0.0 || negative.sum() == 0.0) return 0.0;
  return transport_masses(positive, negative, m).value;
}

Vector row_wasserstein_vector(const Matrix& D, const Metric& m) {
  if (static_cast<std::size_t>(D.cols()) != m.size()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix has " + std::to_string(D.cols()) +
                                                  " columns, metric has " +
                                                  std::to_string(m.size()) + " states");
  }
  Vector out(D.rows());
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    try {
      out(i) = wasserstein_signed(D.row(i).transpose(), m);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::RowSumNotZero) throw;
      throw Error(ErrorCode::RowSumNotZero,
                  "row " + std::to_string(i + 1) + " sums to " + std::to_string(D.row(i).sum()),
                  {static_cast<std::size_t>(i)});
    }
  }
  return out;
}

double wasserstein_matrix_norm(const Matrix& D, const Metric& m) {
  if (D.rows() == 0) return 0.0;
  try {
    return row_wasserstein_vector(D, m).maxCoeff();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::RowSumNotZero) return kInfinity;
    throw;
  }
}

Matrix canonicalize_coupling(const Matrix& gamma, const Metric& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  if (gamma.rows() != n || gamma.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "coupling does not match the metric");
  }
  if (!gamma.allFinite() || gamma.minCoeff() < -kClampTolerance) {
    throw Error(ErrorCode::InvalidArgument, "coupling has negative or non-finite entries");
  }
  Matrix g = gamma.unaryExpr([](double v) { return v <= kDust ? 0.0 : v; });
  const double initial = g.cwiseProduct(m.distances()).sum();

  auto violating = [&g, n]() -> Eigen::Index {
    for (Eigen::Index r = 0; r < n; ++r) {
      bool out = false, in = false;
      for (Eigen::Index s = 0; s < n && !(out && in); ++s) {
        if (s == r) continue;
        out = out || g(r, s) > 0.0;
        in = in || g(s, r) > 0.0;
      }
      if (out && in) return r;
    }
    return -1;
  };

  const std::size_t cap = 1000000;
  std::size_t steps = 0;
  for (Eigen::Index r = violating(); r >= 0; r = violating()) {
    if (++steps > cap) throw Error(ErrorCode::NumericalFailure, "coupling canonicalization did not terminate");
    Eigen::Index u = 0, s = 0;
    while (u == r || g(r, u) <= 0.0) ++u;
    while (s == r || g(s, r) <= 0.0) ++s;
    const double eps = std::min(g(r, u), g(s, r));
    g(r, u) -= eps;
    g(s, r) -= eps;
    g(s, u) += eps;
    g(r, r) += eps;
    if (g(r, u) <= kDust) g(r, u) = 0.0;
    if (g(s, r) <= kDust) g(s, r) = 0.0;
  }

  const double final_cost = g.cwiseProduct(m.distances()).sum();
  if (std::abs(final_cost - initial) > 1e-9 * std::max(1.0, initial)) {
    throw Error(ErrorCode::NotOptimalInput,
                "rerouting changed the transport cost from " + std::to_string(initial) + " to " +
                    std::to_string(final_cost));
  }
  return g;
}

OptimalityReport verify_optimal_pair(const Matrix& gamma, const Vector& f, const ProbVec& p,
                                     const ProbVec& q, const Metric& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  if (gamma.rows() != n || gamma.cols() != n || f.size() != n ||
      static_cast<Eigen::Index>(p.size()) != n || static_cast<Eigen::Index>(q.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "coupling, potential and marginals must match the metric");
  }
  OptimalityReport report;
  const Vector row_sums = gamma.rowwise().sum();
  const Vector col_sums = gamma.colwise().sum().transpose();
  report.marginals = gamma.minCoeff() >= -1e-12 && (row_sums - p.mass()).cwiseAbs().maxCoeff() <= 1e-8 &&
                     (col_sums - q.mass()).cwiseAbs().maxCoeff() <= 1e-8;

  constexpr double kFlow = 1e-10;
  report.one_sided = true;
  for (Eigen::Index r = 0; r < n; ++r) {
    double out = 0.0, in = 0.0;
    for (Eigen::Index s = 0; s < n; ++s) {
      if (s == r) continue;
      out += gamma(r, s);
      in += gamma(s, r);
    }
    if (out > kFlow && in > kFlow) report.one_sided = false;
  }

  report.bounded = f.minCoeff() >= -1e-8 && f.maxCoeff() <= m.diameter() + 1e-8;
  report.lipschitz = true;
  report.slackness = true;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      const double gap = f(r) - f(s) - m(r, s);
      if (r != s && gap > 1e-8) report.lipschitz = false;
      if (gamma(r, s) > kFlow && std::abs(gap) > 1e-7) report.slackness = false;
    }
  }
  report.primal = gamma.cwiseProduct(m.distances()).sum();
  report.dual = (p.mass() - q.mass()).dot(f);
  report.strong_duality = std::abs(report.primal - report.dual) <= 1e-7;
  return report;
}

double tv_distance(const ProbVec& p, const ProbVec& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distributions of different length");
  }
  return 0.5 * (p.mass() - q.mass()).lpNorm<1>();
}

}  // namespace wbound
