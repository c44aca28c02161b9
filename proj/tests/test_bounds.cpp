#include "doctest.h"
#include "oracles.hpp"

#include "wbound/bounds.hpp"
#include "wbound/curvature.hpp"
#include "wbound/error.hpp"
#include "wbound/models.hpp"
#include "wbound/transport.hpp"

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

bool close(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(1.0, std::abs(b)); }

Partition toy_partition() { return Partition::from_blocks(3, {{0, 1}, {2}}); }

struct Setup {
  Generator Q;
  Metric m;
  Aggregation agg;
  ProbVec p0;
  ProbVec pi0;
  BoundInputs in;
};

Setup toy_setup(const ChainModel& chain, const ProbVec& p0) {
  Aggregation agg = partition_aggregation_ctmc(chain.Q, toy_partition());
  ProbVec pi0 = aggregate_initial(p0, toy_partition());
  BoundInputs in = bound_inputs(chain.Q, chain.metric, agg, p0, pi0, true);
  return {chain.Q, chain.metric, std::move(agg), p0, std::move(pi0), std::move(in)};
}

// Lumpable chain: states 1 and 2 have identical rates into {3}.
Generator lumpable() {
  Matrix q(3, 3);
  q << -2, 1, 1, 1, -2, 1, 1, 1, -2;
  return Generator::validate(q);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("defect") {
  const auto toy = toy_ctmc();
  const Aggregation agg = partition_aggregation_ctmc(toy.Q, toy_partition());
  const Defect d = defect(agg.Theta->rates(), agg.A, toy.Q.rates(), toy.metric);
  CHECK(d.vector.isApprox(vec({1, 1})));
  CHECK(d.norm == doctest::Approx(1.0));
  const Defect disc = defect(agg.Theta->rates(), agg.A, toy.Q.rates(), discrete_metric(3));
  CHECK(disc.vector.isApprox(vec({1, 1})));

  const Aggregation exact = partition_aggregation_ctmc(lumpable(), toy_partition());
  const Defect zero = defect(exact.Theta->rates(), exact.A, lumpable().rates(), toy.metric);
  CHECK(zero.vector.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(zero.norm < 1e-15);

  CHECK(code_of([&] { defect(agg.Theta->rates(), agg.A, toy.Q.rates(), discrete_metric(2)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("closed-form bounds on the toy chain") {
  const Setup s = toy_setup(toy_ctmc(), ProbVec::validate(vec({0.5, 0.5, 0})));
  CHECK(s.in.W0 == 0.0);
  CHECK(s.in.k_min == doctest::Approx(-14.0));
  CHECK(s.in.K_global == doctest::Approx(14.0));
  CHECK(*s.in.kappa_min == doctest::Approx(-6.0));
  CHECK(bound_linear_K(s.in, 1.0) == doctest::Approx(15.0));
  CHECK(bound_linear_K(s.in, 0.0) == 0.0);
  for (double t : {0.0, 0.1, 0.5, 1.0}) {
    CHECK(close(bound_exponential(s.in, RateChoice::KMin, t), std::exp(14 * t) / 14 - 1.0 / 14, 1e-12));
  }
  CHECK(code_of([&] { bound_linear_K(s.in, -1.0); }) == ErrorCode::NegativeTime);
  BoundInputs no_kappa = s.in;
  no_kappa.kappa_min.reset();
  CHECK(code_of([&] { bound_exponential(no_kappa, RateChoice::KappaMin, 1.0); }) == ErrorCode::RateUnavailable);
  BoundInputs flat = s.in;
  flat.k_min = 0.0;
  CHECK(bound_exponential(flat, RateChoice::KMin, 2.0) == doctest::Approx(2.0));
}

TEST_CASE("closed-form bounds with the discrete metric") {
  const Setup s = toy_setup(toy_ctmc_discrete(), dirac(3, 0));
  CHECK(s.in.K_global == 0.0);
  CHECK(s.in.k_min == doctest::Approx(1.0));
  CHECK(s.in.W0 == doctest::Approx(0.5));
  for (double t : {0.0, 0.3, 2.0}) {
    CHECK(close(bound_linear_K(s.in, t), s.in.W0 + t, 1e-15));
    CHECK(close(bound_exponential(s.in, RateChoice::KMin, t), (s.in.W0 - 1) * std::exp(-t) + 1, 1e-15));
  }
}

TEST_CASE("time-varying forms on the toy chain") {
  const Setup s = toy_setup(toy_ctmc(), ProbVec::validate(vec({0.5, 0.5, 0})));
  const auto grid = uniform_grid(1.0, 50);
  const PiPath pi = ctmc_pi_path(*s.agg.Theta, s.pi0);
  Quadrature quad;
  quad.rate = 2.0;
  const auto tv = bound_linear_K_timevarying(s.in, pi, grid, quad);
  const auto local = bound_local_K(s.in, pi, s.agg.A, grid, quad);
  const auto hybrid = bound_hybrid(s.in, pi, RateChoice::KMin, grid, quad);
  const double kink = std::log(15.0) / 14.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    CHECK(close(tv[i], 15 * t, 1e-9));
    CHECK(local[i] <= bound_linear_K(s.in, t) + 1e-9);
    const double expected = t <= kink ? std::exp(14 * t) / 14 - 1.0 / 14 : 1 + 15 * (t - kink);
    CHECK(close(hybrid[i], expected, 1e-6));
    CHECK(hybrid[i] <= std::min(bound_linear_K(s.in, t), bound_exponential(s.in, RateChoice::KMin, t)) + 1e-9);
  }
}

TEST_CASE("time-varying forms in degenerate cases") {
  const auto toy = toy_ctmc();
  const Generator Q = lumpable();
  const Aggregation agg = partition_aggregation_ctmc(Q, toy_partition());
  const ProbVec p0 = ProbVec::validate(vec({0.5, 0.5, 0}));
  const ProbVec pi0 = aggregate_initial(p0, toy_partition());
  BoundInputs in = bound_inputs(Q, toy.metric, agg, p0, pi0, false);
  const auto grid = uniform_grid(2.0, 21);
  const PiPath pi = ctmc_pi_path(*agg.Theta, pi0);
  const auto tv = bound_linear_K_timevarying(in, pi, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(close(tv[i], in.K_global * grid[i], 1e-12));

  in.K_local = Vector::Zero(3);
  for (double v : bound_local_K(in, pi, agg.A, grid)) CHECK(std::abs(v) < 1e-14);

  in.K_local = Vector::Constant(3, in.K_global);
  const auto local = bound_local_K(in, pi, agg.A, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(close(local[i], tv[i], 1e-12));
}

TEST_CASE("hybrid follows the exponential form for nonnegative rates") {
  const Setup s = toy_setup(toy_ctmc_discrete(), dirac(3, 0));
  const auto grid = uniform_grid(3.0, 31);
  const auto hybrid = bound_hybrid(s.in, ctmc_pi_path(*s.agg.Theta, s.pi0), RateChoice::KMin, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expo = bound_exponential(s.in, RateChoice::KMin, grid[i]);
    CHECK(close(hybrid[i], expo, 1e-8));
    CHECK(close(hybrid[i], std::min(expo, bound_linear_K(s.in, grid[i])), 1e-8));
  }
}

TEST_CASE("exact error curve") {
  const auto toy = toy_ctmc();
  const auto grid = uniform_grid(1.0, 11);
  {
    const Setup s = toy_setup(toy, ProbVec::validate(vec({0.5, 0.5, 0})));
    const auto exact = exact_error_curve(s.p0, s.Q, s.agg, s.pi0, s.m, grid);
    CHECK(exact[0] == 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(exact[i] <= bound_exponential(s.in, RateChoice::KMin, grid[i]) + 1e-9);
    }
  }
  {
    const Setup s = toy_setup(toy, dirac(3, 0));
    CHECK(s.in.W0 == doctest::Approx(0.5));
    CHECK(exact_error_curve(s.p0, s.Q, s.agg, s.pi0, s.m, grid)[0] == doctest::Approx(0.5));
  }
  {
    const auto inst = random_instance(5, 3, MetricKind::Graph);
    const Aggregation agg = partition_aggregation_ctmc(inst.Q, Partition::singletons(5));
    const ProbVec pi0 = aggregate_initial(inst.p0, Partition::singletons(5));
    for (double v : exact_error_curve(inst.p0, inst.Q, agg, pi0, inst.metric, grid)) CHECK(v < 1e-8);
  }
}

TEST_CASE("discrete-time recurrence") {
  const std::vector<Vector> pis(5, vec({0.25, 0.75}));
  for (double v : dtmc_bound_sequence(0.0, Vector::Zero(2), 1.0, pis, 5)) CHECK(v == 0.0);
  const auto sums = dtmc_bound_sequence(0.0, vec({1, 2}), 0.0, pis, 5);
  for (std::size_t k = 0; k <= 5; ++k) CHECK(sums[k] == doctest::Approx(1.75 * static_cast<double>(k)));

  const auto toy = toy_ctmc();
  const auto [P, lambda] = uniformize(toy.Q);
  (void)lambda;
  const Aggregation agg = partition_aggregation_dtmc(P, toy_partition());
  for (const ProbVec& p0 : {dirac(3, 0), ProbVec::validate(vec({0.5, 0.5, 0})), dirac(3, 2)}) {
    const auto curve = evaluate_dtmc_bounds(P, toy.metric, agg, p0, std::nullopt, 20, true);
    REQUIRE(curve.exact.has_value());
    REQUIRE(curve.bound.size() == 21);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(curve.bound[k] >= (*curve.exact)[k] - 1e-9);
    CHECK(curve.kappa_min == doctest::Approx(-1.5));
  }
}

TEST_CASE("evaluated curves") {
  const auto toy = toy_ctmc();
  const Aggregation agg = partition_aggregation_ctmc(toy.Q, toy_partition());
  BoundRequest request;
  request.grid = uniform_grid(0.5, 5);
  request.exact = true;
  const BoundCurve curve = evaluate_bounds(toy.Q, toy.metric, agg, ProbVec::validate(vec({0.5, 0.5, 0})),
                                           std::nullopt, request);
  CHECK(curve.variants.size() == all_variants().size());
  CHECK(curve.d_max == 5.0);
  for (std::size_t v = 0; v < curve.variants.size(); ++v) {
    CHECK(curve.raw[v][0] == 0.0);
    for (std::size_t i = 0; i < curve.t.size(); ++i) {
      CHECK(curve.clipped[v][i] == std::min(curve.raw[v][i], 5.0));
      CHECK(curve.raw[v][i] >= (*curve.exact)[i] - 1e-6);
    }
  }
  CHECK(curve.raw[0][4] == doctest::Approx(7.5));
}

TEST_CASE("variant names and grids") {
  for (Variant v : all_variants()) CHECK(parse_variant(variant_name(v)) == v);
  CHECK(parse_variant("exp") == Variant::ExpK);
  CHECK_FALSE(parse_variant("cubic").has_value());
  const auto grid = uniform_grid(2.0, 5);
  CHECK(grid == std::vector<double>{0, 0.5, 1, 1.5, 2});
  CHECK(code_of([] { uniform_grid(-1.0, 3); }) == ErrorCode::NegativeTime);
}

TEST_CASE("soundness, consistency and ordering on random chains") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto inst = random_instance(n, rng(), static_cast<MetricKind>(trial % 3), 0.6);
    const Partition part = Partition::from_blocks(n, oracle::random_blocks(rng, n));
    const Aggregation agg = partition_aggregation_ctmc(inst.Q, part);
    BoundRequest request;
    request.grid = uniform_grid(2.0, 41);
    request.exact = true;
    const BoundCurve c = evaluate_bounds(inst.Q, inst.metric, agg, inst.p0, std::nullopt, request);
    const auto& exact = *c.exact;
    auto column = [&](Variant v) {
      return c.raw[std::find(c.variants.begin(), c.variants.end(), v) - c.variants.begin()];
    };
    for (std::size_t v = 0; v < c.variants.size(); ++v) {
      CHECK(c.raw[v][0] == doctest::Approx(c.inputs.W0).epsilon(1e-12));
      for (std::size_t i = 0; i < c.t.size(); ++i) CHECK(c.raw[v][i] >= exact[i] - 1e-6);
    }
    const auto& linear = column(Variant::Linear);
    const auto& tv = column(Variant::LinearTimeVarying);
    const auto& local = column(Variant::Local);
    const auto& hybrid = column(Variant::Hybrid);
    const auto& expk = column(Variant::ExpK);
    for (std::size_t i = 0; i < c.t.size(); ++i) {
      CHECK(local[i] <= tv[i] * (1 + 1e-8) + 1e-12);
      CHECK(tv[i] <= linear[i] * (1 + 1e-8) + 1e-12);
      CHECK(hybrid[i] <= std::min(linear[i], expk[i]) + 1e-9 * std::max(1.0, hybrid[i]));
      if (i > 0) CHECK(linear[i] >= linear[i - 1]);
    }
  }
}

}
