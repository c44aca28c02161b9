#include "wbound/bounds.hpp"

#include "wbound/curvature.hpp"
#include "wbound/error.hpp"
#include "wbound/transport.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>

namespace wbound {

namespace {

// Refinements beyond this many halvings are accepted as they are.
constexpr int kMaxHalvings = 16;

void check_grid(const std::vector<double>& grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw Error(ErrorCode::InvalidArgument, "time grid has a non-finite entry", {i});
    if (grid[i] < 0.0) throw Error(ErrorCode::NegativeTime, "time grid has a negative entry", {i});
    if (i > 0 && grid[i] < grid[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "time grid is not sorted", {i});
    }
  }
}

void check_time(double t) {
  if (std::isnan(t)) throw Error(ErrorCode::InvalidArgument, "time is NaN");
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "negative time " + std::to_string(t));
}

double initial_step(const Quadrature& quad, double length) {
  double h = length;
  if (quad.max_step > 0.0) h = std::min(h, quad.max_step);
  if (quad.rate > 0.0) h = std::min(h, 1e-2 / quad.rate);
  return h;
}

bool converged(double previous, double current, double tolerance) {
  return std::abs(current - previous) < tolerance * std::max(1.0, std::abs(current));
}

// W0 + int_0^t g at every grid point, by composite trapezoid per grid
// interval with step halving.
std::vector<double> integrate(double W0, const std::function<double(double)>& g,
                              const std::vector<double>& grid, const Quadrature& quad) {
  check_grid(grid);
  std::vector<double> out(grid.size());
  double total = W0;
  double left = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double right = grid[i];
    const double length = right - left;
    if (length > 0.0) {
      const double h0 = initial_step(quad, length);
      std::size_t pieces = static_cast<std::size_t>(std::ceil(length / h0 - 1e-9));
      pieces = std::max<std::size_t>(pieces, 1);
      double h = length / static_cast<double>(pieces);
      double sum = 0.5 * (g(left) + g(right));
      for (std::size_t j = 1; j < pieces; ++j) sum += g(left + static_cast<double>(j) * h);
      double estimate = sum * h;
      for (int halving = 0; halving < kMaxHalvings; ++halving) {
        for (std::size_t j = 0; j < pieces; ++j) sum += g(left + (static_cast<double>(j) + 0.5) * h);
        pieces *= 2;
        h *= 0.5;
        const double refined = sum * h;
        const bool done = converged(estimate, refined, quad.tolerance);
        estimate = refined;
        if (done) break;
      }
      total += estimate;
    }
    out[i] = total;
    left = right;
  }
  return out;
}

double rate_value(const BoundInputs& in, RateChoice rate) {
  if (rate == RateChoice::KMin) return in.k_min;
  if (!in.kappa_min) throw Error(ErrorCode::RateUnavailable, "kappa_min was not computed");
  return *in.kappa_min;
}

void check_pi(const Vector& pi, const Vector& defect_vector) {
  if (pi.size() != defect_vector.size()) {
    throw Error(ErrorCode::DimensionMismatch, "aggregated distribution has " + std::to_string(pi.size()) +
                                                  " entries, defect vector has " +
                                                  std::to_string(defect_vector.size()));
  }
}

}  // namespace

Defect defect(const Matrix& dynamics, const Matrix& A, const Matrix& chain, const Metric& m) {
  if (dynamics.rows() != dynamics.cols() || chain.rows() != chain.cols() ||
      A.rows() != dynamics.rows() || A.cols() != chain.rows() ||
      static_cast<std::size_t>(chain.rows()) != m.size()) {
    throw Error(ErrorCode::DimensionMismatch, "dynamics, A, chain and metric sizes do not fit");
  }
  Defect out;
  out.D = dynamics * A - A * chain;
  out.vector = row_wasserstein_vector(out.D, m);
  out.norm = out.vector.size() ? out.vector.maxCoeff() : 0.0;
  return out;
}

double bound_linear_K(const BoundInputs& in, double t) {
  check_time(t);
  return in.W0 + t * (in.defect_norm + in.K_global);
}

double bound_exponential(const BoundInputs& in, RateChoice rate, double t) {
  check_time(t);
  const double k = rate_value(in, rate);
  const double B = in.defect_norm;
  // (1 - e^{-kt})/k via expm1 keeps a rate that is zero up to round-off from
  // cancelling W0 against B/k
  const double growth = k == 0.0 ? t : -std::expm1(-k * t) / k;
  return in.W0 * std::exp(-k * t) + B * growth;
}

PiPath ctmc_pi_path(const Generator& Theta, const ProbVec& pi0) {
  // Propagates from the latest cached time at or before t, so the short
  // hops of the quadrature need only a few uniformization terms.
  auto cache = std::make_shared<std::map<double, ProbVec>>();
  cache->emplace(0.0, pi0);
  return [Theta, cache](double t) {
    check_time(t);
    auto it = std::prev(cache->upper_bound(t));
    if (it->first == t) return it->second.mass();
    ProbVec pi = transient_ctmc(it->second, Theta, t - it->first);
    Vector mass = pi.mass();
    if (cache->size() < 100000) cache->emplace(t, std::move(pi));
    return mass;
  };
}

std::vector<double> bound_linear_K_timevarying(const BoundInputs& in, const PiPath& pi,
                                               const std::vector<double>& grid, const Quadrature& quad) {
  auto slope = [&](double t) {
    const Vector p = pi(t);
    check_pi(p, in.defect_vector);
    return p.dot(in.defect_vector) + in.K_global;
  };
  return integrate(in.W0, slope, grid, quad);
}

std::vector<double> bound_local_K(const BoundInputs& in, const PiPath& pi, const Matrix& A,
                                  const std::vector<double>& grid, const Quadrature& quad) {
  if (!in.K_local) throw Error(ErrorCode::RateUnavailable, "K_loc was not computed");
  const Vector& K = *in.K_local;
  if (A.cols() != K.size() || A.rows() != in.defect_vector.size()) {
    throw Error(ErrorCode::DimensionMismatch, "A does not match the defect vector and K_loc");
  }
  // ptilde . K_loc = pi . (A K_loc)
  const Vector weights = in.defect_vector + A * K;
  auto slope = [&](double t) {
    const Vector p = pi(t);
    check_pi(p, in.defect_vector);
    return p.dot(weights);
  };
  return integrate(in.W0, slope, grid, quad);
}

std::vector<double> bound_hybrid(const BoundInputs& in, const PiPath& pi, RateChoice rate,
                                 const std::vector<double>& grid, const Quadrature& quad) {
  check_grid(grid);
  const double k = rate_value(in, rate);
  const double K = in.K_global;
  auto drive = [&](double t) {
    const Vector p = pi(t);
    check_pi(p, in.defect_vector);
    return p.dot(in.defect_vector);
  };
  auto field = [&](double a, double w) { return a + std::min(K, -k * w); };

  auto rk4 = [&](double w, double left, double right, std::size_t steps) {
    const double h = (right - left) / static_cast<double>(steps);
    double a0 = drive(left);
    for (std::size_t j = 0; j < steps; ++j) {
      const double t0 = left + static_cast<double>(j) * h;
      const double a_mid = drive(t0 + 0.5 * h);
      const double a1 = drive(j + 1 == steps ? right : t0 + h);
      const double k1 = field(a0, w);
      const double k2 = field(a_mid, w + 0.5 * h * k1);
      const double k3 = field(a_mid, w + 0.5 * h * k2);
      const double k4 = field(a1, w + h * k3);
      w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      a0 = a1;
    }
    return w;
  };

  std::vector<double> out(grid.size());
  double w = in.W0;
  double left = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double right = grid[i];
    const double length = right - left;
    if (length > 0.0) {
      double h0 = initial_step(quad, length);
      if (k != 0.0) h0 = std::min(h0, 1e-2 / std::abs(k));
      std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / h0 - 1e-9)));
      double estimate = rk4(w, left, right, steps);
      for (int halving = 0; halving < kMaxHalvings; ++halving) {
        steps *= 2;
        const double refined = rk4(w, left, right, steps);
        const bool done = converged(estimate, refined, quad.tolerance);
        // fourth-order Richardson step
        estimate = refined + (refined - estimate) / 15.0;
        if (done) break;
      }
      w = estimate;
    }
    out[i] = w;
    left = right;
  }
  return out;
}

std::vector<double> exact_error_curve(const ProbVec& p0, const Generator& Q, const Aggregation& agg,
                                      const ProbVec& pi0, const Metric& m,
                                      const std::vector<double>& grid) {
  check_grid(grid);
  if (!agg.Theta) throw Error(ErrorCode::InvalidAggregation, "aggregation has no generator");
  if (p0.size() != Q.size() || agg.n != Q.size() || pi0.size() != agg.m || m.size() != Q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "initial distributions, chain, aggregation and metric do not fit");
  }
  std::vector<double> out(grid.size());
  ProbVec p = p0;
  ProbVec pi = pi0;
  double now = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    p = transient_ctmc(p, Q, grid[i] - now);
    pi = transient_ctmc(pi, *agg.Theta, grid[i] - now);
    now = grid[i];
    out[i] = wasserstein(disaggregate(pi, agg.A), p, m).value;
  }
  return out;
}

std::vector<double> dtmc_bound_sequence(double W0, const Vector& defect_vector, double kappa_min_P,
                                        const std::vector<Vector>& pi_path, std::size_t k_max) {
  if (pi_path.size() < k_max) {
    throw Error(ErrorCode::DimensionMismatch, "need " + std::to_string(k_max) +
                                                  " aggregated distributions, got " +
                                                  std::to_string(pi_path.size()));
  }
  std::vector<double> out(k_max + 1);
  out[0] = W0;
  for (std::size_t k = 0; k < k_max; ++k) {
    check_pi(pi_path[k], defect_vector);
    out[k + 1] = pi_path[k].dot(defect_vector) + (1.0 - kappa_min_P) * out[k];
  }
  return out;
}

std::vector<double> exact_error_sequence(const ProbVec& p0, const TransitionMatrix& P,
                                         const Aggregation& agg, const ProbVec& pi0,
                                         const Metric& m, std::size_t k_max) {
  if (!agg.Pi) throw Error(ErrorCode::InvalidAggregation, "aggregation has no transition matrix");
  if (p0.size() != P.size() || agg.n != P.size() || pi0.size() != agg.m || m.size() != P.size()) {
    throw Error(ErrorCode::DimensionMismatch, "initial distributions, chain, aggregation and metric do not fit");
  }
  std::vector<double> out(k_max + 1);
  ProbVec p = p0;
  ProbVec pi = pi0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    out[k] = wasserstein(disaggregate(pi, agg.A), p, m).value;
    if (k == k_max) break;
    p = transient_dtmc(p, P, 1);
    pi = transient_dtmc(pi, *agg.Pi, 1);
  }
  return out;
}

std::vector<double> uniform_grid(double T, std::size_t points) {
  check_time(T);
  if (points == 0) return {};
  if (points == 1) return {T};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = T * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return grid;
}

const char* variant_name(Variant v) noexcept {
  switch (v) {
    case Variant::Linear: return "linear";
    case Variant::LinearTimeVarying: return "linear_tv";
    case Variant::ExpK: return "exp_k";
    case Variant::ExpKappa: return "exp_kappa";
    case Variant::Local: return "local";
    case Variant::Hybrid: return "hybrid";
  }
  return "unknown";
}

std::vector<Variant> all_variants() {
  return {Variant::Linear, Variant::LinearTimeVarying, Variant::ExpK,
          Variant::ExpKappa, Variant::Local, Variant::Hybrid};
}

std::optional<Variant> parse_variant(const std::string& name) {
  for (Variant v : all_variants()) {
    if (name == variant_name(v)) return v;
  }
  if (name == "exp") return Variant::ExpK;
  return std::nullopt;
}

ProbVec initial_aggregate(const Aggregation& agg, const ProbVec& p0,
                          const std::optional<ProbVec>& explicit_pi0) {
  if (explicit_pi0) {
    if (explicit_pi0->size() != agg.m) {
      throw Error(ErrorCode::DimensionMismatch, "pi0 has " + std::to_string(explicit_pi0->size()) +
                                                    " entries for " + std::to_string(agg.m) +
                                                    " aggregates");
    }
    return *explicit_pi0;
  }
  if (agg.partition) return aggregate_initial(p0, *agg.partition);
  throw Error(ErrorCode::InvalidAggregation, "explicit aggregation without an initial distribution pi0");
}

BoundInputs bound_inputs(const Generator& Q, const Metric& m, const Aggregation& agg,
                         const ProbVec& p0, const ProbVec& pi0, bool with_kappa,
                         std::optional<double> margin) {
  if (!agg.Theta) throw Error(ErrorCode::InvalidAggregation, "aggregation has no generator");
  if (p0.size() != Q.size() || pi0.size() != agg.m) {
    throw Error(ErrorCode::DimensionMismatch, "initial distributions do not fit the chain and aggregation");
  }
  const Defect d = defect(agg.Theta->rates(), agg.A, Q.rates(), m);
  BoundInputs in;
  in.defect_vector = d.vector;
  in.defect_norm = d.norm;
  if (Q.size() >= 2) {
    in.k_min = k_min(Q, m);
    in.K_local = K_local_all(Q, m);
    in.K_global = in.K_local->maxCoeff();
    if (with_kappa) in.kappa_min = kappa_min(Q, m, margin).value;
  } else {
    in.K_local = Vector::Zero(static_cast<Eigen::Index>(Q.size()));
    if (with_kappa) in.kappa_min = 0.0;
  }
  in.W0 = wasserstein(disaggregate(pi0, agg.A), p0, m).value;
  return in;
}

BoundCurve evaluate_bounds(const Generator& Q, const Metric& m, const Aggregation& agg,
                           const ProbVec& p0, const std::optional<ProbVec>& explicit_pi0,
                           const BoundRequest& request) {
  check_grid(request.grid);
  const ProbVec pi0 = initial_aggregate(agg, p0, explicit_pi0);
  const bool with_kappa =
      std::find(request.variants.begin(), request.variants.end(), Variant::ExpKappa) != request.variants.end() ||
      (request.hybrid_rate == RateChoice::KappaMin &&
       std::find(request.variants.begin(), request.variants.end(), Variant::Hybrid) != request.variants.end());

  BoundCurve curve;
  curve.t = request.grid;
  curve.inputs = bound_inputs(Q, m, agg, p0, pi0, with_kappa, request.margin);
  curve.d_max = m.diameter();
  const BoundInputs& in = curve.inputs;
  const PiPath pi = ctmc_pi_path(*agg.Theta, pi0);
  Quadrature quad;
  quad.rate = agg.Theta->max_exit_rate();

  for (Variant v : request.variants) {
    std::vector<double> values;
    switch (v) {
      case Variant::Linear:
        for (double t : request.grid) values.push_back(bound_linear_K(in, t));
        break;
      case Variant::ExpK:
        for (double t : request.grid) values.push_back(bound_exponential(in, RateChoice::KMin, t));
        break;
      case Variant::ExpKappa:
        for (double t : request.grid) values.push_back(bound_exponential(in, RateChoice::KappaMin, t));
        break;
      case Variant::LinearTimeVarying:
        values = bound_linear_K_timevarying(in, pi, request.grid, quad);
        break;
      case Variant::Local:
        values = bound_local_K(in, pi, agg.A, request.grid, quad);
        break;
      case Variant::Hybrid:
        values = bound_hybrid(in, pi, request.hybrid_rate, request.grid, quad);
        break;
    }
    std::vector<double> clipped(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) clipped[i] = std::min(values[i], curve.d_max);
    curve.variants.push_back(v);
    curve.raw.push_back(std::move(values));
    curve.clipped.push_back(std::move(clipped));
  }
  if (request.exact) curve.exact = exact_error_curve(p0, Q, agg, pi0, m, request.grid);
  return curve;
}

DtmcBoundCurve evaluate_dtmc_bounds(const TransitionMatrix& P, const Metric& m, const Aggregation& agg,
                                    const ProbVec& p0, const std::optional<ProbVec>& explicit_pi0,
                                    std::size_t steps, bool exact) {
  if (!agg.Pi) throw Error(ErrorCode::InvalidAggregation, "aggregation has no transition matrix");
  const ProbVec pi0 = initial_aggregate(agg, p0, explicit_pi0);
  if (p0.size() != P.size()) throw Error(ErrorCode::DimensionMismatch, "p0 does not fit the chain");
  const Defect d = defect(agg.Pi->probs(), agg.A, P.probs(), m);

  DtmcBoundCurve curve;
  curve.W0 = wasserstein(disaggregate(pi0, agg.A), p0, m).value;
  curve.defect_vector = d.vector;
  curve.defect_norm = d.norm;
  curve.kappa_min = P.size() >= 2 ? kappa_min_dtmc(P, m) : 1.0;
  curve.d_max = m.diameter();

  std::vector<Vector> path;
  ProbVec pi = pi0;
  for (std::size_t k = 0; k < steps; ++k) {
    path.push_back(pi.mass());
    pi = transient_dtmc(pi, *agg.Pi, 1);
  }
  curve.bound = dtmc_bound_sequence(curve.W0, d.vector, curve.kappa_min, path, steps);
  curve.clipped.resize(curve.bound.size());
  for (std::size_t i = 0; i < curve.bound.size(); ++i) curve.clipped[i] = std::min(curve.bound[i], curve.d_max);
  if (exact) curve.exact = exact_error_sequence(p0, P, agg, pi0, m, steps);
  return curve;
}

}  // namespace wbound
