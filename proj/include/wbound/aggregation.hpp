#pragma once

#include "wbound/markov.hpp"
#include "wbound/metric.hpp"

#include <optional>
#include <vector>

namespace wbound {

/// Disjoint non-empty blocks covering states 0..n-1. Members of each block
/// are kept sorted; block order is as given.
class Partition {
 public:
  static Partition from_blocks(std::size_t n, std::vector<std::vector<State>> blocks);
  static Partition singletons(std::size_t n);
  static Partition single_block(std::size_t n);

  std::size_t size() const noexcept { return block_of_.size(); }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<std::vector<State>>& blocks() const noexcept { return blocks_; }
  const std::vector<State>& block(std::size_t b) const { return blocks_.at(b); }
  std::size_t block_of(State s) const { return block_of_.at(s); }

  bool operator==(const Partition&) const = default;

 private:
  Partition(std::vector<std::vector<State>> blocks, std::vector<std::size_t> block_of)
      : blocks_(std::move(blocks)), block_of_(std::move(block_of)) {}

  std::vector<std::vector<State>> blocks_;
  std::vector<std::size_t> block_of_;
};

/// Per-block weights alpha_b, aligned with the sorted members of block b.
/// An empty optional means uniform weights within every block.
using Alpha = std::optional<std::vector<Vector>>;

struct Aggregation {
  std::size_t m = 0;
  std::size_t n = 0;
  /// m x n, non-negative rows summing to 1.
  Matrix A;
  /// n x m block indicator, present for partition-based aggregations.
  std::optional<Matrix> Lambda;
  std::optional<Partition> partition;
  std::optional<Generator> Theta;
  std::optional<TransitionMatrix> Pi;

  bool is_ctmc() const noexcept { return Theta.has_value(); }
  /// Theta or Pi as a plain matrix.
  const Matrix& dynamics() const { return Theta ? Theta->rates() : Pi->probs(); }
};

/// A from alpha (rows supported inside their block), Lambda the indicator.
Matrix disaggregation_matrix(const Partition& part, const Alpha& alpha = std::nullopt);
Matrix lifting_matrix(const Partition& part);

/// Theta = A Q Lambda.
Aggregation partition_aggregation_ctmc(const Generator& Q, const Partition& part,
                                       const Alpha& alpha = std::nullopt);
/// Pi = A P Lambda.
Aggregation partition_aggregation_dtmc(const TransitionMatrix& P, const Partition& part,
                                       const Alpha& alpha = std::nullopt);

/// Aggregations not built from a partition: only the row sums of A and the
/// generator (or stochastic matrix) property of the dynamics are checked.
Aggregation explicit_aggregation_ctmc(Matrix A, Generator Theta);
Aggregation explicit_aggregation_dtmc(Matrix A, TransitionMatrix Pi);

/// pi0^T = p0^T Lambda, the block masses of p0.
ProbVec aggregate_initial(const ProbVec& p0, const Partition& part);

/// p^T = pi^T A.
ProbVec disaggregate(const ProbVec& pi, const Matrix& A);

/// Greedy clustering in index order: a state joins the first block whose
/// lowest-index member is within eps, otherwise it opens a new block.
Partition epsilon_partition(const Metric& m, double eps);

}  // namespace wbound
