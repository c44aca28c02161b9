#pragma once

#include "wbound/markov.hpp"
#include "wbound/metric.hpp"

namespace wbound {

enum class TransportMethod {
  /// Transportation simplex on the bipartite basis tree (default).
  Transportation,
  /// The coupling LP handed to the generic simplex in `lp`.
  GenericLp,
};

struct Transport {
  double value = 0.0;
  /// n x n coupling gamma with row sums p and column sums q. It is returned
  /// in canonical form: every state has either no off-diagonal outflow or no
  /// off-diagonal inflow.
  Matrix coupling;
  /// Optimal 1-Lipschitz potential, shifted so that min f = 0.
  Vector potential;
};

/// W1(p, q) with an optimal coupling and potential.
Transport wasserstein(const ProbVec& p, const ProbVec& q, const Metric& m,
                      TransportMethod method = TransportMethod::Transportation);

/// Same, for two non-negative mass vectors of equal total (within 1e-9
/// relative). Used for the positive and negative parts of signed rows.
Transport transport_masses(const Vector& supply, const Vector& demand, const Metric& m,
                           TransportMethod method = TransportMethod::Transportation);

/// max f . row over feasible potentials, for a row summing to zero.
/// Throws `RowSumNotZero` otherwise.
double wasserstein_signed(const Vector& row, const Metric& m);

/// |D|_W: wasserstein_signed of every row. Throws `RowSumNotZero` naming the
/// first row that does not sum to zero.
Vector row_wasserstein_vector(const Matrix& D, const Metric& m);

/// ||D||_W: the maximum of |D|_W, or +inf if some row does not sum to zero.
double wasserstein_matrix_norm(const Matrix& D, const Metric& m);

/// Rewrites an optimal coupling so that no state has both off-diagonal
/// inflow and outflow, by repeatedly rerouting r -> u and s -> r mass onto
/// s -> u and parking the same amount on (r, r). Throws `NotOptimalInput`
/// if the transport cost changes by more than 1e-9, which can only happen
/// when the input was not optimal.
Matrix canonicalize_coupling(const Matrix& gamma, const Metric& m);

struct OptimalityReport {
  bool marginals = false;        // (i) row sums p, column sums q within 1e-8
  bool one_sided = false;        // (ii) no state with both off-diagonal in- and outflow
  bool bounded = false;          // (iii) 0 <= f <= d_max within 1e-8
  bool lipschitz = false;        // f(r) - f(s) <= d(r,s) + 1e-8
  bool slackness = false;        // (iv) gamma(r,s) > 1e-10 => f(r) - f(s) = d(r,s) within 1e-7
  bool strong_duality = false;   // cost of gamma equals (p - q) . f within 1e-7
  double primal = 0.0;
  double dual = 0.0;

  bool all() const noexcept {
    return marginals && one_sided && bounded && lipschitz && slackness && strong_duality;
  }
};

OptimalityReport verify_optimal_pair(const Matrix& gamma, const Vector& f, const ProbVec& p,
                                     const ProbVec& q, const Metric& m);

/// 1/2 ||p - q||_1.
double tv_distance(const ProbVec& p, const ProbVec& q);

}  // namespace wbound
