#pragma once

#include "wbound/types.hpp"

#include <span>

namespace wbound {

inline constexpr double kRowSumTolerance = 1e-9;
inline constexpr double kClampTolerance = 1e-12;

/// Probability vector. Entries in (-1e-12, 0) are clamped to zero on
/// construction; anything more negative, or a total outside 1 +- 1e-9, is an
/// `InvalidDistribution` error. The data is never renormalized.
class ProbVec {
 public:
  static ProbVec validate(Vector mass);

  std::size_t size() const noexcept { return static_cast<std::size_t>(mass_.size()); }
  double operator[](State s) const { return mass_(s); }
  const Vector& mass() const noexcept { return mass_; }

 private:
  explicit ProbVec(Vector mass) : mass_(std::move(mass)) {}
  friend ProbVec renormalized(Vector mass);

  Vector mass_;
};

/// Clamps small negatives and rescales to unit mass. For results of our own
/// numerical routines only; user data goes through `ProbVec::validate`.
ProbVec renormalized(Vector mass);

/// Dirac measure on state r.
ProbVec dirac(std::size_t n, State r);

/// Uniform distribution on n states.
ProbVec uniform(std::size_t n);

struct RateEntry {
  State from;
  State to;
  double rate;
};

/// CTMC generator: off-diagonal rates >= 0, rows summing to 0 within 1e-9.
class Generator {
 public:
  static Generator validate(Matrix rates);
  /// Builds a generator from (r, s, rate) entries. Diagonal entries may be
  /// omitted, in which case they are completed so that rows sum to zero.
  static Generator from_triplets(std::size_t n, std::span<const RateEntry> entries);

  std::size_t size() const noexcept { return static_cast<std::size_t>(rates_.rows()); }
  double operator()(State r, State s) const { return rates_(r, s); }
  const Matrix& rates() const noexcept { return rates_; }
  double exit_rate(State r) const { return -rates_(r, r); }
  double max_exit_rate() const;

 private:
  explicit Generator(Matrix rates) : rates_(std::move(rates)) {}

  Matrix rates_;
};

/// DTMC transition matrix: entries in [0,1], rows summing to 1 within 1e-9.
class TransitionMatrix {
 public:
  static TransitionMatrix validate(Matrix probs);
  static TransitionMatrix from_triplets(std::size_t n, std::span<const RateEntry> entries);

  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.rows()); }
  double operator()(State r, State s) const { return probs_(r, s); }
  const Matrix& probs() const noexcept { return probs_; }

 private:
  explicit TransitionMatrix(Matrix probs) : probs_(std::move(probs)) {}

  Matrix probs_;
};

struct Uniformized {
  TransitionMatrix P;
  double rate;
};

/// P = I + Q / lambda with lambda = max exit rate (1 when Q = 0).
Uniformized uniformize(const Generator& Q);

/// p0^T exp(tQ) by uniformization; Poisson tail below 1e-13.
ProbVec transient_ctmc(const ProbVec& p0, const Generator& Q, double t);

/// p0^T P^k.
ProbVec transient_dtmc(const ProbVec& p0, const TransitionMatrix& P, std::size_t k);

}  // namespace wbound
