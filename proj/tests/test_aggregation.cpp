#include "doctest.h"
#include "oracles.hpp"

#include "wbound/aggregation.hpp"
#include "wbound/error.hpp"
#include "wbound/models.hpp"

using namespace wbound;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  std::size_t i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Partition toy_partition() { return Partition::from_blocks(3, {{0, 1}, {2}}); }

}  // namespace

TEST_SUITE("aggregation") {

TEST_CASE("partitions") {
  const Partition p = Partition::from_blocks(4, {{3, 1}, {0}, {2}});
  CHECK(p.block_count() == 3);
  CHECK(p.block(0) == std::vector<State>{1, 3});
  CHECK(p.block_of(3) == 0);
  CHECK(p.block_of(0) == 1);
  CHECK(code_of([] { Partition::from_blocks(3, {{0, 1}, {1, 2}}); }) == ErrorCode::InvalidPartition);
  CHECK(code_of([] { Partition::from_blocks(3, {{0, 1}}); }) == ErrorCode::InvalidPartition);
  CHECK(code_of([] { Partition::from_blocks(3, {{0, 1}, {}, {2}}); }) == ErrorCode::InvalidPartition);
  CHECK(code_of([] { Partition::from_blocks(3, {{0, 1, 5}, {2}}); }) == ErrorCode::InvalidPartition);
  CHECK(Partition::singletons(3).block_count() == 3);
  CHECK(Partition::single_block(3).block_count() == 1);
}

TEST_CASE("toy aggregation") {
  const auto toy = toy_ctmc();
  const Aggregation agg = partition_aggregation_ctmc(toy.Q, toy_partition());
  Matrix A(2, 3);
  A << 0.5, 0.5, 0, 0, 0, 1;
  Matrix theta(2, 2);
  theta << -2, 2, 2, -2;
  CHECK(agg.A == A);
  CHECK(agg.Theta->rates().isApprox(theta));
  CHECK((agg.A * *agg.Lambda).isApprox(Matrix::Identity(2, 2)));
  Matrix D(2, 3);
  D << -1, 1, 0, 1, -1, 0;
  CHECK((agg.Theta->rates() * agg.A - agg.A * toy.Q.rates()).isApprox(D));
}

TEST_CASE("singleton and one-block aggregations") {
  const auto toy = toy_ctmc();
  const Aggregation same = partition_aggregation_ctmc(toy.Q, Partition::singletons(3));
  CHECK(same.A == Matrix::Identity(3, 3));
  CHECK(same.Lambda->transpose() == same.A);
  CHECK(same.Theta->rates() == toy.Q.rates());

  const Aggregation one = partition_aggregation_ctmc(toy.Q, Partition::single_block(3));
  CHECK(one.Theta->size() == 1);
  CHECK(one.Theta->rates()(0, 0) == 0.0);
}

TEST_CASE("discrete-time aggregation") {
  const auto toy = toy_ctmc();
  const auto [P, lambda] = uniformize(toy.Q);
  (void)lambda;
  const Aggregation agg = partition_aggregation_dtmc(P, toy_partition());
  CHECK(agg.Pi->probs().isApprox(Matrix::Constant(2, 2, 0.5)));
  CHECK(partition_aggregation_dtmc(P, Partition::singletons(3)).Pi->probs() == P.probs());
  CHECK(partition_aggregation_dtmc(P, Partition::single_block(3)).Pi->probs()(0, 0) == doctest::Approx(1.0));
  CHECK_FALSE(agg.is_ctmc());
}

TEST_CASE("alpha weights") {
  const auto toy = toy_ctmc();
  const std::vector<Vector> alpha{vec({0.25, 0.75}), vec({1})};
  const Aggregation agg = partition_aggregation_ctmc(toy.Q, toy_partition(), alpha);
  CHECK(agg.A.row(0) == vec({0.25, 0.75, 0}).transpose());
  CHECK((agg.A * *agg.Lambda).isApprox(Matrix::Identity(2, 2)));

  const std::vector<Vector> negative{vec({-0.25, 1.25}), vec({1})};
  CHECK(code_of([&] { partition_aggregation_ctmc(toy.Q, toy_partition(), negative); }) == ErrorCode::BadAlpha);
  const std::vector<Vector> short_sum{vec({0.25, 0.5}), vec({1})};
  CHECK(code_of([&] { partition_aggregation_ctmc(toy.Q, toy_partition(), short_sum); }) == ErrorCode::BadAlpha);
  const std::vector<Vector> wrong_size{vec({1}), vec({1})};
  CHECK(code_of([&] { partition_aggregation_ctmc(toy.Q, toy_partition(), wrong_size); }) == ErrorCode::BadAlpha);
}

TEST_CASE("random partitions give valid dynamics") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const auto inst = random_instance(n, rng(), MetricKind::Line, 0.5);
    const Partition part = Partition::from_blocks(n, oracle::random_blocks(rng, n));
    std::vector<Vector> alpha;
    for (const auto& block : part.blocks()) alpha.push_back(oracle::random_distribution(rng, block.size()));
    const Aggregation agg = partition_aggregation_ctmc(inst.Q, part, alpha);
    CHECK((agg.A * *agg.Lambda).isApprox(Matrix::Identity(part.block_count(), part.block_count()), 1e-12));
    CHECK(agg.A.minCoeff() >= 0.0);
    CHECK_NOTHROW(Generator::validate(agg.Theta->rates()));

    const auto [P, lambda] = uniformize(inst.Q);
    (void)lambda;
    CHECK_NOTHROW(TransitionMatrix::validate(partition_aggregation_dtmc(P, part, alpha).Pi->probs()));
  }
}

TEST_CASE("aggregate and disaggregate") {
  CHECK(aggregate_initial(dirac(3, 0), toy_partition()).mass() == vec({1, 0}));
  CHECK(aggregate_initial(uniform(3), Partition::singletons(3)).mass() == uniform(3).mass());
  CHECK(aggregate_initial(ProbVec::validate(vec({0.2, 0.3, 0.5})), Partition::single_block(3)).mass() == vec({1}));
  CHECK(code_of([] { aggregate_initial(dirac(2, 0), toy_partition()); }) == ErrorCode::DimensionMismatch);

  const Matrix A = disaggregation_matrix(toy_partition());
  CHECK(disaggregate(dirac(2, 0), A).mass() == vec({0.5, 0.5, 0}));
  CHECK(disaggregate(uniform(3), Matrix::Identity(3, 3)).mass() == uniform(3).mass());
  CHECK(code_of([&] { disaggregate(uniform(3), A); }) == ErrorCode::DimensionMismatch);

  for (double t : {0.0, 0.3, 1.0}) {
    const double e = std::exp(-4 * t);
    const ProbVec pi = ProbVec::validate(vec({0.5 * (1 + e), 0.5 * (1 - e)}));
    const Vector expected = vec({0.25 * (1 + e), 0.25 * (1 + e), 0.5 * (1 - e)});
    CHECK((disaggregate(pi, A).mass() - expected).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("block-constant distributions survive the round trip") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 8;
    const Partition part = Partition::from_blocks(n, oracle::random_blocks(rng, n));
    const Vector level = oracle::random_distribution(rng, part.block_count());
    Vector p(n);
    for (State s = 0; s < n; ++s) {
      const auto b = part.block_of(s);
      p(s) = level(b) / static_cast<double>(part.block(b).size());
    }
    const ProbVec p0 = renormalized(p);
    const ProbVec back = disaggregate(aggregate_initial(p0, part), disaggregation_matrix(part));
    CHECK((back.mass() - p0.mass()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("singleton partition reproduces the chain") {
  const auto inst = random_instance(6, 5, MetricKind::Line);
  const Aggregation agg = partition_aggregation_ctmc(inst.Q, Partition::singletons(6));
  const ProbVec pi0 = aggregate_initial(inst.p0, *agg.partition);
  for (double t : {0.1, 1.0, 4.0}) {
    const ProbVec p = transient_ctmc(inst.p0, inst.Q, t);
    const ProbVec tilde = disaggregate(transient_ctmc(pi0, *agg.Theta, t), agg.A);
    CHECK((p.mass() - tilde.mass()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("explicit aggregations") {
  const auto toy = toy_ctmc();
  Matrix A(2, 3);
  A << 0.2, 0.3, 0.5, 1, 0, 0;
  Matrix theta(2, 2);
  theta << -1, 1, 3, -3;
  const Aggregation agg = explicit_aggregation_ctmc(A, Generator::validate(theta));
  CHECK(agg.m == 2);
  CHECK(agg.n == 3);
  CHECK_FALSE(agg.partition.has_value());
  A(0, 0) = 0.3;
  CHECK(code_of([&] { explicit_aggregation_ctmc(A, Generator::validate(theta)); }) == ErrorCode::InvalidAggregation);
  A(0, 0) = -0.1;
  A(0, 1) = 0.6;
  CHECK(code_of([&] { explicit_aggregation_ctmc(A, Generator::validate(theta)); }) == ErrorCode::InvalidAggregation);
  Matrix three = Matrix::Zero(3, 3);
  CHECK(code_of([&] { explicit_aggregation_ctmc(Matrix::Identity(2, 3), Generator::validate(three)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("epsilon partition") {
  const auto toy = toy_ctmc();
  CHECK(epsilon_partition(toy.metric, 0.5) == Partition::singletons(3));
  CHECK(epsilon_partition(toy.metric, 5.0) == Partition::single_block(3));
  CHECK(epsilon_partition(toy.metric, 1.0) == toy_partition());
  // representative is the lowest member, not any member
  const std::vector<double> x{0, 1, 2};
  CHECK(epsilon_partition(line_metric(x), 1.0) == Partition::from_blocks(3, {{0, 1}, {2}}));
  CHECK(code_of([&] { epsilon_partition(toy.metric, 0.0); }) == ErrorCode::InvalidArgument);
}

}
