#include "wbound/aggregation.hpp"

#include "wbound/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wbound {

Partition Partition::from_blocks(std::size_t n, std::vector<std::vector<State>> blocks) {
  std::vector<std::size_t> block_of(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& block = blocks[b];
    if (block.empty()) {
      throw Error(ErrorCode::InvalidPartition, "block " + std::to_string(b + 1) + " is empty", {b});
    }
    std::sort(block.begin(), block.end());
    for (State s : block) {
      if (s >= n) {
        throw Error(ErrorCode::InvalidPartition,
                    "state " + std::to_string(s + 1) + " outside 1.." + std::to_string(n), {s});
      }
      if (block_of[s] != n) {
        throw Error(ErrorCode::InvalidPartition,
                    "state " + std::to_string(s + 1) + " appears in two blocks", {s});
      }
      block_of[s] = b;
    }
  }
  for (State s = 0; s < n; ++s) {
    if (block_of[s] == n) {
      throw Error(ErrorCode::InvalidPartition, "state " + std::to_string(s + 1) + " is in no block", {s});
    }
  }
  return Partition(std::move(blocks), std::move(block_of));
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::vector<State>> blocks(n);
  for (State s = 0; s < n; ++s) blocks[s] = {s};
  return from_blocks(n, std::move(blocks));
}

Partition Partition::single_block(std::size_t n) {
  std::vector<State> all(n);
  for (State s = 0; s < n; ++s) all[s] = s;
  return from_blocks(n, {all});
}

Matrix disaggregation_matrix(const Partition& part, const Alpha& alpha) {
  const std::size_t m = part.block_count();
  Matrix A = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(part.size()));
  if (alpha && alpha->size() != m) {
    throw Error(ErrorCode::BadAlpha, "alpha has " + std::to_string(alpha->size()) +
                                         " vectors for " + std::to_string(m) + " blocks");
  }
  for (std::size_t b = 0; b < m; ++b) {
    const auto& members = part.block(b);
    if (!alpha) {
      for (State s : members) A(b, s) = 1.0 / static_cast<double>(members.size());
      continue;
    }
    const Vector& weights = (*alpha)[b];
    if (static_cast<std::size_t>(weights.size()) != members.size()) {
      throw Error(ErrorCode::BadAlpha, "alpha for block " + std::to_string(b + 1) + " has " +
                                           std::to_string(weights.size()) + " entries, block has " +
                                           std::to_string(members.size()),
                  {b});
    }
    for (std::size_t i = 0; i < members.size(); ++i) {
      double w = weights(i);
      if (w < 0.0 && w > -kClampTolerance) w = 0.0;
      if (!std::isfinite(w) || w < 0.0) {
        throw Error(ErrorCode::BadAlpha, "negative weight in alpha for block " + std::to_string(b + 1), {b});
      }
      A(b, members[i]) = w;
    }
    if (std::abs(A.row(b).sum() - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::BadAlpha, "alpha for block " + std::to_string(b + 1) + " sums to " +
                                           std::to_string(A.row(b).sum()),
                  {b});
    }
  }
  return A;
}

Matrix lifting_matrix(const Partition& part) {
  Matrix L = Matrix::Zero(static_cast<Eigen::Index>(part.size()),
                          static_cast<Eigen::Index>(part.block_count()));
  for (State s = 0; s < part.size(); ++s) L(s, part.block_of(s)) = 1.0;
  return L;
}

namespace {

Aggregation partition_skeleton(std::size_t n, const Partition& part, const Alpha& alpha) {
  if (part.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "partition covers " + std::to_string(part.size()) +
                                                  " states, chain has " + std::to_string(n));
  }
  Aggregation agg;
  agg.n = n;
  agg.m = part.block_count();
  agg.A = disaggregation_matrix(part, alpha);
  agg.Lambda = lifting_matrix(part);
  agg.partition = part;
  return agg;
}

void check_rows_of_A(const Matrix& A) {
  if (A.rows() == 0 || A.cols() == 0) throw Error(ErrorCode::InvalidAggregation, "A is empty");
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index s = 0; s < A.cols(); ++s) {
      if (!std::isfinite(A(i, s)) || A(i, s) < 0.0) {
        throw Error(ErrorCode::InvalidAggregation, "A has a negative entry",
                    {static_cast<std::size_t>(i), static_cast<std::size_t>(s)});
      }
    }
    if (std::abs(A.row(i).sum() - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::InvalidAggregation,
                  "row " + std::to_string(i + 1) + " of A sums to " + std::to_string(A.row(i).sum()),
                  {static_cast<std::size_t>(i)});
    }
  }
}

}  // namespace

Aggregation partition_aggregation_ctmc(const Generator& Q, const Partition& part, const Alpha& alpha) {
  Aggregation agg = partition_skeleton(Q.size(), part, alpha);
  Matrix theta = agg.A * Q.rates() * *agg.Lambda;
  // Exact row sums up to rounding; repair the diagonal so validation sees zero.
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    theta(i, i) -= theta.row(i).sum();
  }
  agg.Theta = Generator::validate(std::move(theta));
  return agg;
}

Aggregation partition_aggregation_dtmc(const TransitionMatrix& P, const Partition& part, const Alpha& alpha) {
  Aggregation agg = partition_skeleton(P.size(), part, alpha);
  agg.Pi = TransitionMatrix::validate(agg.A * P.probs() * *agg.Lambda);
  return agg;
}

Aggregation explicit_aggregation_ctmc(Matrix A, Generator Theta) {
  check_rows_of_A(A);
  if (static_cast<std::size_t>(A.rows()) != Theta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "A has " + std::to_string(A.rows()) +
                                                  " rows, Theta has " + std::to_string(Theta.size()) +
                                                  " states");
  }
  Aggregation agg;
  agg.m = static_cast<std::size_t>(A.rows());
  agg.n = static_cast<std::size_t>(A.cols());
  agg.A = std::move(A);
  agg.Theta = std::move(Theta);
  return agg;
}

Aggregation explicit_aggregation_dtmc(Matrix A, TransitionMatrix Pi) {
  check_rows_of_A(A);
  if (static_cast<std::size_t>(A.rows()) != Pi.size()) {
    throw Error(ErrorCode::DimensionMismatch, "A has " + std::to_string(A.rows()) +
                                                  " rows, Pi has " + std::to_string(Pi.size()) +
                                                  " states");
  }
  Aggregation agg;
  agg.m = static_cast<std::size_t>(A.rows());
  agg.n = static_cast<std::size_t>(A.cols());
  agg.A = std::move(A);
  agg.Pi = std::move(Pi);
  return agg;
}

ProbVec aggregate_initial(const ProbVec& p0, const Partition& part) {
  if (p0.size() != part.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distribution has " + std::to_string(p0.size()) +
                                                  " states, partition covers " +
                                                  std::to_string(part.size()));
  }
  Vector pi = Vector::Zero(static_cast<Eigen::Index>(part.block_count()));
  for (State s = 0; s < p0.size(); ++s) pi(part.block_of(s)) += p0[s];
  return renormalized(std::move(pi));
}

ProbVec disaggregate(const ProbVec& pi, const Matrix& A) {
  if (static_cast<std::size_t>(A.rows()) != pi.size()) {
    throw Error(ErrorCode::DimensionMismatch, "distribution has " + std::to_string(pi.size()) +
                                                  " entries, A has " + std::to_string(A.rows()) +
                                                  " rows");
  }
  return renormalized(A.transpose() * pi.mass());
}

Partition epsilon_partition(const Metric& m, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  std::vector<std::vector<State>> blocks;
  for (State s = 0; s < m.size(); ++s) {
    auto it = std::find_if(blocks.begin(), blocks.end(),
                           [&](const std::vector<State>& b) { return m(b.front(), s) <= eps; });
    if (it == blocks.end()) {
      blocks.push_back({s});
    } else {
      it->push_back(s);
    }
  }
  return Partition::from_blocks(m.size(), std::move(blocks));
}

}  // namespace wbound
