#include "doctest.h"
#include "oracles.hpp"

#include "wbound/error.hpp"
#include "wbound/models.hpp"
#include "wbound/transport.hpp"

using namespace wbound;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(v.size());
  std::size_t i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

const std::vector<double> kLine{0, 2, 3, 4.5, 6, 7};

ProbVec example_p() { return ProbVec::validate(vec({0.35, 0.25, 0.05, 0.25, 0.1, 0})); }
ProbVec example_q() { return ProbVec::validate(vec({0.2, 0.45, 0.05, 0, 0.05, 0.25})); }

// first optimal coupling of the worked example, before rerouting
Matrix example_coupling() {
  Matrix g = Matrix::Zero(6, 6);
  g(0, 0) = 0.2;
  g(0, 1) = 0.15;
  g(1, 1) = 0.25;
  g(2, 1) = 0.05;
  g(3, 2) = 0.05;
  g(3, 4) = 0.05;
  g(3, 5) = 0.15;
  g(4, 5) = 0.1;
  return g;
}

Matrix example_canonical() {
  Matrix g = Matrix::Zero(6, 6);
  g(0, 0) = 0.2;
  g(0, 1) = 0.15;
  g(1, 1) = 0.25;
  g(2, 2) = 0.05;
  g(3, 1) = 0.05;
  g(3, 5) = 0.2;
  g(4, 4) = 0.05;
  g(4, 5) = 0.05;
  return g;
}

double cost(const Matrix& g, const Metric& m) { return g.cwiseProduct(m.distances()).sum(); }

double off_diagonal(const Matrix& g) { return g.sum() - g.trace(); }

Metric random_metric(std::mt19937_64& rng, std::size_t n) {
  const auto kind = static_cast<MetricKind>(rng() % 3);
  return random_instance(n, rng(), kind).metric;
}

ProbVec random_prob(std::mt19937_64& rng, std::size_t n) {
  return renormalized(oracle::random_distribution(rng, n, 0.3));
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("worked example value, potential and coupling") {
  const Metric m = line_metric(kLine);
  const ProbVec p = example_p(), q = example_q();
  for (auto method : {TransportMethod::Transportation, TransportMethod::GenericLp}) {
    const Transport t = wasserstein(p, q, m, method);
    CHECK(t.value == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(verify_optimal_pair(t.coupling, t.potential, p, q, m).all());
    CHECK(t.potential.minCoeff() == 0.0);
  }
  const Vector f = vec({2, 0, 1, 2.5, 1, 0});
  CHECK((p.mass() - q.mass()).dot(f) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(verify_optimal_pair(example_canonical(), f, p, q, m).all());
}

TEST_CASE("equal inputs cost nothing") {
  const Metric m = line_metric(kLine);
  const ProbVec p = example_p();
  const Transport t = wasserstein(p, p, m);
  CHECK(t.value == 0.0);
  CHECK(off_diagonal(t.coupling) == 0.0);
  CHECK(verify_optimal_pair(t.coupling, t.potential, p, p, m).all());
}

TEST_CASE("discrete metric gives total variation") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 9;
    const ProbVec p = random_prob(rng, n), q = random_prob(rng, n);
    CHECK(std::abs(wasserstein(p, q, discrete_metric(n)).value - tv_distance(p, q)) < 1e-14);
  }
}

TEST_CASE("line metric matches the cumulative distribution oracle") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 12;
    std::vector<double> x(n);
    for (auto& v : x) v = 10.0 * unit(rng);
    const Metric m = line_metric(x);
    const ProbVec p = random_prob(rng, n), q = random_prob(rng, n);
    const double expected = oracle::w1_line(x, p.mass(), q.mass());
    CHECK(std::abs(wasserstein(p, q, m).value - expected) < 1e-12);
    CHECK(std::abs(wasserstein(p, q, m, TransportMethod::GenericLp).value - expected) < 1e-12);
  }
}

TEST_CASE("vertex enumeration agrees on eighths") {
  std::mt19937_64 rng(3);
  auto eighths = [&](std::size_t n) {
    Vector v = Vector::Zero(n);
    for (int k = 0; k < 8; ++k) v(rng() % n) += 0.125;
    return ProbVec::validate(v);
  };
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const Metric m = random_metric(rng, n);
    const ProbVec p = eighths(n), q = eighths(n);
    const double expected = oracle::w1_vertex_enumeration(p.mass(), q.mass(), m.distances());
    CHECK(std::abs(wasserstein(p, q, m).value - expected) < 1e-9);
  }
}

TEST_CASE("both solver paths agree and certify") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + trial % 15;
    const Metric m = random_metric(rng, n);
    const ProbVec p = random_prob(rng, n), q = random_prob(rng, n);
    const Transport a = wasserstein(p, q, m);
    const Transport b = wasserstein(p, q, m, TransportMethod::GenericLp);
    CHECK(std::abs(a.value - b.value) < 1e-8);
    const auto ra = verify_optimal_pair(a.coupling, a.potential, p, q, m);
    const auto rb = verify_optimal_pair(b.coupling, b.potential, p, q, m);
    CHECK(ra.all());
    CHECK(rb.all());
    CHECK(std::abs(ra.primal - ra.dual) < 1e-7);
  }
}

TEST_CASE("distance axioms on random triples") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 8;
    const Metric m = random_metric(rng, n);
    const ProbVec a = random_prob(rng, n), b = random_prob(rng, n), c = random_prob(rng, n);
    const double ab = wasserstein(a, b, m).value;
    CHECK(ab >= 0.0);
    CHECK(std::abs(ab - wasserstein(b, a, m).value) < 1e-12);
    CHECK(ab <= wasserstein(a, c, m).value + wasserstein(c, b, m).value + 1e-12);
    CHECK(wasserstein(a, a, m).value == 0.0);
    if (tv_distance(a, b) > 1e-9) CHECK(ab > 0.0);
    CHECK(ab <= m.diameter() * tv_distance(a, b) + 1e-12);
  }
}

TEST_CASE("shifting the potential keeps the objective") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const Metric m = random_metric(rng, n);
    const ProbVec p = random_prob(rng, n), q = random_prob(rng, n);
    const Transport t = wasserstein(p, q, m);
    const double room = m.diameter() - t.potential.maxCoeff();
    const Vector shifted = (t.potential.array() + 0.5 * room).matrix();
    CHECK(std::abs((p.mass() - q.mass()).dot(shifted) - t.value) < 1e-12);
    CHECK(verify_optimal_pair(t.coupling, shifted, p, q, m).all());
  }
}

TEST_CASE("signed rows") {
  const Metric toy = toy_ctmc().metric;
  CHECK(wasserstein_signed(Vector::Zero(3), toy) == 0.0);
  CHECK(wasserstein_signed(vec({-1, 1, 0}), toy) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wasserstein_signed(vec({1, -1, 0}), toy) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(wasserstein_signed(vec({0.3, -0.5, 0.2}), discrete_metric(3)) == doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const Metric m = random_metric(rng, n);
    const ProbVec p = random_prob(rng, n), q = random_prob(rng, n);
    const double scale = 0.1 + static_cast<double>(trial);
    const Vector row = scale * (p.mass() - q.mass());
    CHECK(std::abs(wasserstein_signed(row, m) - scale * wasserstein(p, q, m).value) < 1e-9 * scale);
    CHECK(std::abs(wasserstein_signed(row, discrete_metric(n)) - 0.5 * row.cwiseAbs().sum()) < 1e-12 * scale);
  }
  try {
    wasserstein_signed(vec({0.5, 0, 0}), toy);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RowSumNotZero);
  }
}

TEST_CASE("row vector and matrix norm") {
  const Metric toy = toy_ctmc().metric;
  Matrix D(2, 3);
  D << -1, 1, 0, 1, -1, 0;
  CHECK(row_wasserstein_vector(D, toy).isApprox(vec({1, 1})));
  CHECK(wasserstein_matrix_norm(D, toy) == doctest::Approx(1.0));
  CHECK(row_wasserstein_vector(Matrix::Zero(2, 3), toy) == Vector::Zero(2));
  CHECK(wasserstein_matrix_norm(Matrix::Zero(2, 3), toy) == 0.0);
  Matrix bad = D;
  bad(1, 2) = 0.5;
  CHECK(std::isinf(wasserstein_matrix_norm(bad, toy)));
  try {
    row_wasserstein_vector(bad, toy);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RowSumNotZero);
    REQUIRE(e.indices().size() == 1);
    CHECK(e.indices()[0] == 1);
  }

  // rows of a difference of stochastic matrices
  std::mt19937_64 rng(8);
  const std::size_t n = 5;
  const Metric m = random_metric(rng, n);
  Matrix B(3, n), C(3, n);
  for (int i = 0; i < 3; ++i) {
    B.row(i) = oracle::random_distribution(rng, n).transpose();
    C.row(i) = oracle::random_distribution(rng, n).transpose();
  }
  const Vector w = row_wasserstein_vector(B - C, m);
  for (int i = 0; i < 3; ++i) {
    const double expected = wasserstein(renormalized(B.row(i).transpose()), renormalized(C.row(i).transpose()), m).value;
    CHECK(std::abs(w(i) - expected) < 1e-12);
  }

  // discrete metric: half the infinity norm
  Matrix S(3, 4);
  S << 0.2, -0.1, -0.1, 0, 1, 0, 0, -1, 0.3, 0.3, -0.3, -0.3;
  CHECK(wasserstein_matrix_norm(S, discrete_metric(4)) == doctest::Approx(0.5 * S.cwiseAbs().rowwise().sum().maxCoeff()));
}

TEST_CASE("canonicalizing the worked coupling") {
  const Metric m = line_metric(kLine);
  const Matrix before = example_coupling();
  CHECK(cost(before, m) == doctest::Approx(0.975).epsilon(1e-12));
  const Matrix after = canonicalize_coupling(before, m);
  CHECK((after - example_canonical()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(cost(after, m) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(wasserstein(example_p(), example_q(), m).coupling.isApprox(example_canonical(), 1e-14));

  CHECK(canonicalize_coupling(example_canonical(), m) == example_canonical());
  const Matrix diag = example_p().mass().asDiagonal();
  CHECK(canonicalize_coupling(diag, m) == diag);
}

TEST_CASE("canonicalizing never adds off-diagonal mass") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + trial % 6;
    // a line metric makes every monotone chain of moves optimal, so an
    // optimal coupling with through-traffic is easy to write down
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i) + 0.1 * static_cast<double>(rng() % 5);
    const Metric m = line_metric(x);
    Matrix g = Matrix::Zero(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) g(i, i + 1) = 0.1 + 0.01 * static_cast<double>(rng() % 10);
    g /= g.sum();
    const Matrix c = canonicalize_coupling(g, m);
    CHECK(std::abs(cost(c, m) - cost(g, m)) < 1e-12);
    CHECK(off_diagonal(c) <= off_diagonal(g) + 1e-15);
    CHECK((c.rowwise().sum() - g.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((c.colwise().sum() - g.colwise().sum()).cwiseAbs().maxCoeff() < 1e-15);
    const ProbVec p = renormalized(g.rowwise().sum());
    const ProbVec q = renormalized(g.colwise().sum().transpose());
    CHECK(verify_optimal_pair(c, wasserstein(p, q, m).potential, p, q, m).one_sided);
  }
}

TEST_CASE("non-optimal couplings are rejected") {
  const Metric m = toy_ctmc().metric;
  // 1 -> 3 -> 2 detour: rerouting shortens it
  Matrix g = Matrix::Zero(3, 3);
  g(0, 2) = 0.5;
  g(2, 1) = 0.5;
  try {
    canonicalize_coupling(g, m);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOptimalInput);
  }
}

TEST_CASE("verification catches each failure") {
  const Metric m = line_metric(kLine);
  const ProbVec p = example_p(), q = example_q();
  const Vector f = vec({2, 0, 1, 2.5, 1, 0});

  Vector bent = f;
  bent(3) = 2.4;  // breaks slackness on (4,6) and (4,2) while staying Lipschitz
  const auto slack = verify_optimal_pair(example_canonical(), bent, p, q, m);
  CHECK(slack.marginals);
  CHECK(slack.lipschitz);
  CHECK_FALSE(slack.slackness);

  CHECK_FALSE(verify_optimal_pair(example_coupling(), f, p, q, m).one_sided);
  CHECK_FALSE(verify_optimal_pair(example_canonical(), f, q, p, m).marginals);
  CHECK_FALSE(verify_optimal_pair(example_canonical(), (f.array() + 5.0).matrix(), p, q, m).bounded);
  Vector steep = f;
  steep(0) = 5.0;
  CHECK_FALSE(verify_optimal_pair(example_canonical(), steep, p, q, m).lipschitz);

  const Matrix diag = p.mass().asDiagonal();
  CHECK(verify_optimal_pair(diag, Vector::Zero(6), p, p, m).all());
}

TEST_CASE("total variation") {
  const ProbVec a = ProbVec::validate(vec({0.5, 0.5}));
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(dirac(2, 0), dirac(2, 1)) == 1.0);
  CHECK(tv_distance(a, dirac(2, 0)) == 0.5);
  try {
    tv_distance(a, dirac(3, 0));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("unequal masses and dimension errors") {
  const Metric m = discrete_metric(2);
  CHECK_THROWS_AS(transport_masses(vec({1, 0}), vec({0, 2}), m), Error);
  CHECK(transport_masses(vec({2, 0}), vec({0, 2}), m).value == doctest::Approx(2.0));
  try {
    wasserstein(dirac(2, 0), dirac(3, 0), m);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

}
