#include "wbound/markov.hpp"

#include "wbound/error.hpp"

#include <cmath>
#include <string>

namespace wbound {

namespace {

constexpr double kPoissonTail = 1e-13;

void require_square(const Matrix& m, ErrorCode code, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is " + std::to_string(m.rows()) + "x" +
                                                  std::to_string(m.cols()));
  }
  if (m.rows() == 0) throw Error(code, std::string(what) + " has no states");
}

void clamp_small_negatives(Matrix& m, bool skip_diagonal) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index s = 0; s < m.cols(); ++s) {
      if (skip_diagonal && r == s) continue;
      if (m(r, s) < 0.0 && m(r, s) > -kClampTolerance) m(r, s) = 0.0;
    }
  }
}

}  // namespace

ProbVec ProbVec::validate(Vector mass) {
  if (mass.size() == 0) throw Error(ErrorCode::InvalidDistribution, "empty distribution");
  for (Eigen::Index s = 0; s < mass.size(); ++s) {
    if (!std::isfinite(mass(s))) {
      throw Error(ErrorCode::InvalidDistribution, "non-finite mass", {static_cast<State>(s)});
    }
    if (mass(s) < 0.0) {
      if (mass(s) > -kClampTolerance) {
        mass(s) = 0.0;
      } else {
        throw Error(ErrorCode::InvalidDistribution,
                    "negative mass at state " + std::to_string(s + 1), {static_cast<State>(s)});
      }
    }
  }
  const double total = mass.sum();
  if (std::abs(total - 1.0) > kRowSumTolerance) {
    throw Error(ErrorCode::InvalidDistribution, "mass sums to " + std::to_string(total));
  }
  return ProbVec(std::move(mass));
}

ProbVec renormalized(Vector mass) {
  for (Eigen::Index s = 0; s < mass.size(); ++s) {
    if (mass(s) < 0.0) mass(s) = 0.0;
  }
  const double total = mass.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::NumericalFailure, "distribution lost all mass");
  mass /= total;
  return ProbVec(std::move(mass));
}

ProbVec dirac(std::size_t n, State r) {
  if (r >= n) {
    throw Error(ErrorCode::IndexOutOfRange,
                "state " + std::to_string(r + 1) + " outside 1.." + std::to_string(n), {r});
  }
  Vector mass = Vector::Zero(n);
  mass(r) = 1.0;
  return ProbVec::validate(std::move(mass));
}

ProbVec uniform(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "uniform distribution on zero states");
  return ProbVec::validate(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Generator Generator::validate(Matrix rates) {
  require_square(rates, ErrorCode::InvalidGenerator, "generator");
  clamp_small_negatives(rates, true);
  for (Eigen::Index r = 0; r < rates.rows(); ++r) {
    for (Eigen::Index s = 0; s < rates.cols(); ++s) {
      if (!std::isfinite(rates(r, s))) {
        throw Error(ErrorCode::InvalidGenerator, "non-finite rate",
                    {static_cast<State>(r), static_cast<State>(s)});
      }
      if (r != s && rates(r, s) < 0.0) {
        throw Error(ErrorCode::InvalidGenerator,
                    "negative rate Q(" + std::to_string(r + 1) + "," + std::to_string(s + 1) + ")",
                    {static_cast<State>(r), static_cast<State>(s)});
      }
    }
    const double sum = rates.row(r).sum();
    if (std::abs(sum) > kRowSumTolerance) {
      throw Error(ErrorCode::InvalidGenerator,
                  "row " + std::to_string(r + 1) + " sums to " + std::to_string(sum),
                  {static_cast<State>(r)});
    }
  }
  return Generator(std::move(rates));
}

Generator Generator::from_triplets(std::size_t n, std::span<const RateEntry> entries) {
  if (n == 0) throw Error(ErrorCode::InvalidGenerator, "generator on zero states");
  Matrix rates = Matrix::Zero(n, n);
  std::vector<bool> has_diagonal(n, false);
  for (const auto& e : entries) {
    if (e.from >= n || e.to >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "rate entry outside 1.." + std::to_string(n),
                  {e.from, e.to});
    }
    rates(e.from, e.to) += e.rate;
    if (e.from == e.to) has_diagonal[e.from] = true;
  }
  for (State r = 0; r < n; ++r) {
    if (!has_diagonal[r]) {
      rates(r, r) = 0.0;
      rates(r, r) = -rates.row(r).sum();
    }
  }
  return validate(std::move(rates));
}

double Generator::max_exit_rate() const {
  double lambda = 0.0;
  for (Eigen::Index r = 0; r < rates_.rows(); ++r) lambda = std::max(lambda, -rates_(r, r));
  return lambda;
}

TransitionMatrix TransitionMatrix::validate(Matrix probs) {
  require_square(probs, ErrorCode::InvalidTransitionMatrix, "transition matrix");
  clamp_small_negatives(probs, false);
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    for (Eigen::Index s = 0; s < probs.cols(); ++s) {
      const double v = probs(r, s);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0 + kRowSumTolerance) {
        throw Error(ErrorCode::InvalidTransitionMatrix,
                    "entry P(" + std::to_string(r + 1) + "," + std::to_string(s + 1) +
                        ") outside [0,1]",
                    {static_cast<State>(r), static_cast<State>(s)});
      }
    }
    const double sum = probs.row(r).sum();
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::InvalidTransitionMatrix,
                  "row " + std::to_string(r + 1) + " sums to " + std::to_string(sum),
                  {static_cast<State>(r)});
    }
  }
  return TransitionMatrix(std::move(probs));
}

TransitionMatrix TransitionMatrix::from_triplets(std::size_t n, std::span<const RateEntry> entries) {
  if (n == 0) throw Error(ErrorCode::InvalidTransitionMatrix, "transition matrix on zero states");
  Matrix probs = Matrix::Zero(n, n);
  for (const auto& e : entries) {
    if (e.from >= n || e.to >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "entry outside 1.." + std::to_string(n),
                  {e.from, e.to});
    }
    probs(e.from, e.to) += e.rate;
  }
  return validate(std::move(probs));
}

Uniformized uniformize(const Generator& Q) {
  double lambda = Q.max_exit_rate();
  if (lambda == 0.0) lambda = 1.0;
  const auto n = static_cast<Eigen::Index>(Q.size());
  Matrix P = Matrix::Identity(n, n) + Q.rates() / lambda;
  // I + Q/lambda can leave -1e-17 on the diagonal of the fastest state.
  for (Eigen::Index r = 0; r < n; ++r) P(r, r) = std::max(P(r, r), 0.0);
  return {TransitionMatrix::validate(std::move(P)), lambda};
}

ProbVec transient_ctmc(const ProbVec& p0, const Generator& Q, double t) {
  if (p0.size() != Q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distribution has " + std::to_string(p0.size()) +
                                                  " states, generator " + std::to_string(Q.size()));
  }
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::NegativeTime, "t must be >= 0");
  if (t == 0.0) return p0;

  const auto [P, lambda] = uniformize(Q);
  const double lt = lambda * t;
  const auto cap = static_cast<std::size_t>(std::ceil(lt + 40.0 * std::sqrt(lt + 1.0) + 50.0));

  // Poisson weights in log space so that large lambda*t does not underflow e^{-lambda t}.
  Eigen::RowVectorXd term = p0.mass().transpose();
  Eigen::RowVectorXd result = Eigen::RowVectorXd::Zero(term.size());
  long double accumulated = 0.0L;
  const double log_lt = std::log(lt);
  for (std::size_t k = 0; k <= cap; ++k) {
    const double log_w = -lt + static_cast<double>(k) * log_lt - std::lgamma(static_cast<double>(k) + 1.0);
    const double w = std::exp(log_w);
    result += w * term;
    accumulated += w;
    if (1.0L - accumulated < kPoissonTail && static_cast<double>(k) >= lt) break;
    term = term * P.probs();
  }
  return renormalized(result.transpose());
}

ProbVec transient_dtmc(const ProbVec& p0, const TransitionMatrix& P, std::size_t k) {
  if (p0.size() != P.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distribution has " + std::to_string(p0.size()) +
                                                  " states, matrix " + std::to_string(P.size()));
  }
  Eigen::RowVectorXd row = p0.mass().transpose();
  for (std::size_t step = 0; step < k; ++step) row = row * P.probs();
  return renormalized(row.transpose());
}

}  // namespace wbound
