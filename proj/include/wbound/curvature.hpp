#pragma once

#include "wbound/markov.hpp"
#include "wbound/metric.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace wbound {

/// Coarse Ricci curvature of a CTMC:
///   kappa(r,s) = -V / d(r,s),  V = max (Q_r - Q_s) . f
/// over 1-Lipschitz f with 0 <= f <= d_max and f(r) - f(s) = d(r,s).
/// `prune` restricts the LP to the supports of Q_r and Q_s (same value).
double kappa_ctmc(const Generator& Q, const Metric& m, State r, State s, bool prune = true);

/// Closed-form lower bound k(r,s) <= kappa(r,s).
double k_lower(const Generator& Q, const Metric& m, State r, State s);

/// Symmetric matrix of k(r,s) with zero diagonal.
Matrix k_matrix(const Generator& Q, const Metric& m);

double k_min(const Generator& Q, const Metric& m);
/// K = max{0, -min_{r != s} d(r,s) k(r,s)}.
double K_global(const Generator& Q, const Metric& m);
/// K_loc(r) = max{0, -min_{s != r} d(r,s) k(r,s)}.
double K_local(const Generator& Q, const Metric& m, State r);
Vector K_local_all(const Generator& Q, const Metric& m);

/// Default candidate margin 0.01 (1 + |tau|).
double default_margin(double tau);

struct KappaMin {
  double value = 0.0;
  /// kappa at the pair minimizing k.
  double threshold = 0.0;
  double margin = 0.0;
  /// Pairs (r < s) whose kappa was computed exactly.
  std::vector<std::pair<State, State>> solved;
  std::vector<double> kappa;
};

/// min over pairs of kappa, solving only the pairs with k(r,s) < tau + margin
/// where tau is kappa at the k-minimizing pair. Exact because kappa >= k.
KappaMin kappa_min(const Generator& Q, const Metric& m, std::optional<double> margin = std::nullopt);

/// Exact kappa for all unordered pairs (upper triangle filled, symmetric).
/// Refuses n > 200 unless `allow_large`.
Matrix kappa_all(const Generator& Q, const Metric& m, bool allow_large = false);

/// kappa(r,s) = 1 - W1(P_r, P_s) / d(r,s).
double kappa_dtmc(const TransitionMatrix& P, const Metric& m, State r, State s);

/// min over all pairs of kappa_dtmc. Refuses n > 200 unless `allow_large`.
double kappa_min_dtmc(const TransitionMatrix& P, const Metric& m, bool allow_large = false);

/// One-sided derivative at 0+ of W1(p e^{uQ}, q e^{uQ}): the maximum of
/// (p - q)^T Q f over the optimal potentials of W1(p, q).
double wasserstein_derivative(const ProbVec& p, const ProbVec& q, const Generator& Q, const Metric& m);

}  // namespace wbound
