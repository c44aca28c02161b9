#include "wbound/curvature.hpp"

#include "lipschitz.hpp"
#include "wbound/error.hpp"
#include "wbound/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wbound {

namespace {

constexpr std::size_t kLargeChain = 200;

void check_pair(std::size_t n, std::size_t metric_n, State r, State s) {
  if (n != metric_n) {
    throw Error(ErrorCode::DimensionMismatch, "chain has " + std::to_string(n) +
                                                  " states, metric has " + std::to_string(metric_n));
  }
  if (r >= n || s >= n) {
    throw Error(ErrorCode::IndexOutOfRange, "state index out of range", {r, s});
  }
  if (r == s) throw Error(ErrorCode::SamePair, "curvature needs two distinct states", {r, s});
}

void check_sizes(std::size_t n, std::size_t metric_n) {
  if (n != metric_n) {
    throw Error(ErrorCode::DimensionMismatch, "chain has " + std::to_string(n) +
                                                  " states, metric has " + std::to_string(metric_n));
  }
  if (n < 2) throw Error(ErrorCode::SingleState, "curvature needs at least two states");
}

// Q_r . d(x, .) written through the zero row sum, so that terms with
// d(x, u) = d(x, r) vanish exactly instead of cancelling against the diagonal.
double row_times_distance(const Generator& Q, const Metric& m, State r, State x) {
  const auto& rates = Q.rates();
  const double base = m(x, r);
  double sum = 0.0;
  for (State u = 0; u < Q.size(); ++u) {
    if (u != r && rates(r, u) != 0.0) sum += rates(r, u) * (m(x, u) - base);
  }
  return sum;
}

}  // namespace

double kappa_ctmc(const Generator& Q, const Metric& m, State r, State s, bool prune) {
  check_pair(Q.size(), m.size(), r, s);
  const auto n = static_cast<Eigen::Index>(Q.size());
  detail::PotentialProgram program;
  program.objective = (Q.rates().row(r) - Q.rates().row(s)).transpose();
  Vector tie = Vector::Zero(n);
  tie(r) = 1.0;
  tie(s) = -1.0;
  program.rows.push_back({tie, m(r, s), true});
  program.include = {r, s};
  const auto sol = detail::maximize_potential(m, program, prune);
  if (sol.status != lp::Status::Optimal) {
    throw Error(ErrorCode::NumericalFailure,
                std::string("curvature LP ended ") + lp::status_name(sol.status), {r, s});
  }
  return -sol.value / m(r, s);
}

double k_lower(const Generator& Q, const Metric& m, State r, State s) {
  check_pair(Q.size(), m.size(), r, s);
  const double qr_r = row_times_distance(Q, m, r, r), qr_s = row_times_distance(Q, m, r, s);
  const double qs_s = row_times_distance(Q, m, s, s), qs_r = row_times_distance(Q, m, s, r);
  return -(std::min(qr_r, qr_s) + std::min(qs_s, qs_r)) / m(r, s);
}

Matrix k_matrix(const Generator& Q, const Metric& m) {
  check_sizes(Q.size(), m.size());
  const std::size_t n = Q.size();
  // Q_r . d(s, .) at entry (r, s)
  Matrix QD(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State r = 0; r < n; ++r) {
    for (State s = 0; s < n; ++s) QD(r, s) = row_times_distance(Q, m, r, s);
  }
  Matrix k = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State r = 0; r < n; ++r) {
    for (State s = r + 1; s < n; ++s) {
      const double value =
          -(std::min(QD(r, r), QD(r, s)) + std::min(QD(s, s), QD(s, r))) / m(r, s);
      k(r, s) = value;
      k(s, r) = value;
    }
  }
  return k;
}

double k_min(const Generator& Q, const Metric& m) {
  const Matrix k = k_matrix(Q, m);
  double best = kInfinity;
  for (Eigen::Index r = 0; r < k.rows(); ++r) {
    for (Eigen::Index s = r + 1; s < k.cols(); ++s) best = std::min(best, k(r, s));
  }
  return best;
}

Vector K_local_all(const Generator& Q, const Metric& m) {
  const Matrix k = k_matrix(Q, m);
  const auto n = k.rows();
  Vector out(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double lowest = kInfinity;
    for (Eigen::Index s = 0; s < n; ++s) {
      if (s != r) lowest = std::min(lowest, m(r, s) * k(r, s));
    }
    out(r) = std::max(0.0, -lowest);
  }
  return out;
}

double K_global(const Generator& Q, const Metric& m) { return K_local_all(Q, m).maxCoeff(); }

double K_local(const Generator& Q, const Metric& m, State r) {
  check_sizes(Q.size(), m.size());
  if (r >= Q.size()) throw Error(ErrorCode::IndexOutOfRange, "state index out of range", {r});
  return K_local_all(Q, m)(static_cast<Eigen::Index>(r));
}

double default_margin(double tau) { return 0.01 * (1.0 + std::abs(tau)); }

KappaMin kappa_min(const Generator& Q, const Metric& m, std::optional<double> margin) {
  const Matrix k = k_matrix(Q, m);
  const std::size_t n = Q.size();
  if (margin && !(*margin >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "margin must be non-negative");
  }
  State br = 0, bs = 1;
  for (State r = 0; r < n; ++r) {
    for (State s = r + 1; s < n; ++s) {
      if (k(r, s) < k(br, bs)) {
        br = r;
        bs = s;
      }
    }
  }
  KappaMin out;
  out.threshold = kappa_ctmc(Q, m, br, bs);
  out.margin = margin ? *margin : default_margin(out.threshold);
  out.value = out.threshold;
  out.solved.emplace_back(br, bs);
  out.kappa.push_back(out.threshold);
  const double cutoff = out.threshold + out.margin;
  for (State r = 0; r < n; ++r) {
    for (State s = r + 1; s < n; ++s) {
      if ((r == br && s == bs) || !(k(r, s) < cutoff)) continue;
      const double value = kappa_ctmc(Q, m, r, s);
      out.solved.emplace_back(r, s);
      out.kappa.push_back(value);
      out.value = std::min(out.value, value);
    }
  }
  return out;
}

Matrix kappa_all(const Generator& Q, const Metric& m, bool allow_large) {
  check_sizes(Q.size(), m.size());
  const std::size_t n = Q.size();
  if (n > kLargeChain && !allow_large) {
    throw Error(ErrorCode::TooManyStates, "all-pairs curvature on " + std::to_string(n) +
                                              " states needs the explicit large-chain flag");
  }
  Matrix kappa = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State r = 0; r < n; ++r) {
    for (State s = r + 1; s < n; ++s) {
      kappa(r, s) = kappa_ctmc(Q, m, r, s);
      kappa(s, r) = kappa(r, s);
    }
  }
  return kappa;
}

double kappa_dtmc(const TransitionMatrix& P, const Metric& m, State r, State s) {
  check_pair(P.size(), m.size(), r, s);
  const Vector pr = P.probs().row(r).transpose();
  const Vector ps = P.probs().row(s).transpose();
  return 1.0 - transport_masses(pr, ps, m).value / m(r, s);
}

double kappa_min_dtmc(const TransitionMatrix& P, const Metric& m, bool allow_large) {
  check_sizes(P.size(), m.size());
  const std::size_t n = P.size();
  if (n > kLargeChain && !allow_large) {
    throw Error(ErrorCode::TooManyStates, "all-pairs curvature on " + std::to_string(n) +
                                              " states needs the explicit large-chain flag");
  }
  double best = kInfinity;
  for (State r = 0; r < n; ++r) {
    for (State s = r + 1; s < n; ++s) best = std::min(best, kappa_dtmc(P, m, r, s));
  }
  return best;
}

double wasserstein_derivative(const ProbVec& p, const ProbVec& q, const Generator& Q, const Metric& m) {
  if (p.size() != q.size() || p.size() != Q.size() || Q.size() != m.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distributions, generator and metric must agree in size");
  }
  const Vector diff = p.mass() - q.mass();
  const Vector objective = Q.rates().transpose() * diff;
  if (objective.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const double w = wasserstein(p, q, m).value;

  // Restrict to the argmax set of the W1 dual. The equality carries the
  // solver error of w, so if it comes out infeasible it is relaxed by a
  // small two-sided slack, doubled until the program solves.
  const double unit = 1e-9 * std::max(1.0, std::abs(w));
  for (int attempt = 0; attempt < 9; ++attempt) {
    const double slack = attempt == 0 ? 0.0 : unit * std::ldexp(1.0, attempt - 1);
    detail::PotentialProgram program;
    program.objective = objective;
    program.rows.push_back({diff, w + slack, false});
    program.rows.push_back({-diff, -(w - slack), false});
    const auto sol = detail::maximize_potential(m, program);
    if (sol.status == lp::Status::Optimal) return sol.value;
  }
  throw Error(ErrorCode::NumericalFailure, "argmax restriction of the W1 dual stayed infeasible");
}

}  // namespace wbound
