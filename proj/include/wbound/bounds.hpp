#pragma once

#include "wbound/aggregation.hpp"
#include "wbound/markov.hpp"
#include "wbound/metric.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wbound {

struct Defect {
  /// Theta A - A Q (or Pi A - A P), m x n.
  Matrix D;
  /// |D|_W
  Vector vector;
  /// ||D||_W
  double norm = 0.0;
};

/// `dynamics` is Theta (or Pi), `chain` is Q (or P).
Defect defect(const Matrix& dynamics, const Matrix& A, const Matrix& chain, const Metric& m);

struct BoundInputs {
  Vector defect_vector;
  double defect_norm = 0.0;
  double k_min = 0.0;
  std::optional<double> kappa_min;
  double K_global = 0.0;
  std::optional<Vector> K_local;
  double W0 = 0.0;
};

enum class RateChoice { KMin, KappaMin };

/// W0 + t (||D||_W + K).
double bound_linear_K(const BoundInputs& in, double t);

/// (W0 - B/k) e^{-k t} + B/k with B = ||D||_W and k the chosen rate;
/// W0 + B t when k = 0. Throws `RateUnavailable` if kappa_min is requested
/// but absent.
double bound_exponential(const BoundInputs& in, RateChoice rate, double t);

/// Aggregated distribution at time t.
using PiPath = std::function<Vector(double)>;

PiPath ctmc_pi_path(const Generator& Theta, const ProbVec& pi0);

struct Quadrature {
  /// Upper limit on the initial sub-step; 0 picks min(grid step, 1e-2 / lambda).
  double max_step = 0.0;
  /// Rate used for the automatic step, typically the uniformization rate of Theta.
  double rate = 1.0;
  double tolerance = 1e-8;
};

/// W0 + int_0^t pi_s . |D|_W ds + t K at each grid point.
std::vector<double> bound_linear_K_timevarying(const BoundInputs& in, const PiPath& pi,
                                               const std::vector<double>& grid,
                                               const Quadrature& quad = {});

/// W0 + int_0^t (pi_s . |D|_W + sum_r ptilde_s(r) K_loc(r)) ds with ptilde_s = pi_s^T A.
std::vector<double> bound_local_K(const BoundInputs& in, const PiPath& pi, const Matrix& A,
                                  const std::vector<double>& grid, const Quadrature& quad = {});

/// Solution of W' = pi_t . |D|_W + min(K, -k W), W(0) = W0: at every time the
/// smaller of the linear-K and exponential-rate slopes.
std::vector<double> bound_hybrid(const BoundInputs& in, const PiPath& pi, RateChoice rate,
                                 const std::vector<double>& grid, const Quadrature& quad = {});

/// W1(pi_t^T A, p0^T e^{tQ}) on the grid.
std::vector<double> exact_error_curve(const ProbVec& p0, const Generator& Q, const Aggregation& agg,
                                      const ProbVec& pi0, const Metric& m,
                                      const std::vector<double>& grid);

/// W_{k+1} = pi_k . |Pi A - A P|_W + (1 - kappa_min(P)) W_k for k < k_max;
/// returns W_0..W_{k_max}. `pi_path` holds pi_0..pi_{k_max - 1} at least.
std::vector<double> dtmc_bound_sequence(double W0, const Vector& defect_vector, double kappa_min_P,
                                        const std::vector<Vector>& pi_path, std::size_t k_max);

/// W1(pi_k^T A, p0^T P^k) for k = 0..k_max.
std::vector<double> exact_error_sequence(const ProbVec& p0, const TransitionMatrix& P,
                                         const Aggregation& agg, const ProbVec& pi0,
                                         const Metric& m, std::size_t k_max);

/// `points` equally spaced times from 0 to T inclusive.
std::vector<double> uniform_grid(double T, std::size_t points);

enum class Variant { Linear, LinearTimeVarying, ExpK, ExpKappa, Local, Hybrid };

const char* variant_name(Variant v) noexcept;
std::optional<Variant> parse_variant(const std::string& name);
std::vector<Variant> all_variants();

struct BoundRequest {
  std::vector<double> grid;
  std::vector<Variant> variants = all_variants();
  bool exact = false;
  /// Candidate margin for kappa_min (default when empty).
  std::optional<double> margin;
  RateChoice hybrid_rate = RateChoice::KMin;
};

struct BoundCurve {
  std::vector<double> t;
  std::vector<Variant> variants;
  std::vector<std::vector<double>> raw;
  /// raw values capped at d_max, the largest possible error
  std::vector<std::vector<double>> clipped;
  std::optional<std::vector<double>> exact;
  BoundInputs inputs;
  double d_max = 0.0;
};

/// Initial aggregated distribution: block masses of p0 for partition-based
/// aggregations, otherwise `explicit_pi0`, which must then be given.
ProbVec initial_aggregate(const Aggregation& agg, const ProbVec& p0,
                          const std::optional<ProbVec>& explicit_pi0);

/// Everything the bound formulas need (defect, k_min, K, K_loc, W0 and
/// kappa_min when `with_kappa`).
BoundInputs bound_inputs(const Generator& Q, const Metric& m, const Aggregation& agg,
                         const ProbVec& p0, const ProbVec& pi0, bool with_kappa,
                         std::optional<double> margin = std::nullopt);

BoundCurve evaluate_bounds(const Generator& Q, const Metric& m, const Aggregation& agg,
                           const ProbVec& p0, const std::optional<ProbVec>& explicit_pi0,
                           const BoundRequest& request);

struct DtmcBoundCurve {
  std::vector<double> bound;
  std::vector<double> clipped;
  std::optional<std::vector<double>> exact;
  double W0 = 0.0;
  Vector defect_vector;
  double defect_norm = 0.0;
  double kappa_min = 0.0;
  double d_max = 0.0;
};

DtmcBoundCurve evaluate_dtmc_bounds(const TransitionMatrix& P, const Metric& m, const Aggregation& agg,
                                    const ProbVec& p0, const std::optional<ProbVec>& explicit_pi0,
                                    std::size_t steps, bool exact);

}  // namespace wbound
