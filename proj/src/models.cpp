#include "wbound/models.hpp"

#include "wbound/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

namespace wbound {

ChainModel toy_ctmc() {
  Matrix q(3, 3);
  q << -1, 0, 1,
        1, -4, 3,
        0, 2, -2;
  Matrix d(3, 3);
  d << 0, 1, 5,
       1, 0, 4,
       5, 4, 0;
  return {Generator::validate(std::move(q)), Metric::validate(std::move(d))};
}

ChainModel toy_ctmc_discrete() {
  ChainModel toy = toy_ctmc();
  return {toy.Q, discrete_metric(3)};
}

std::size_t Box::states() const {
  std::size_t count = 1;
  for (std::size_t i = 0; i < lo.size(); ++i) count *= static_cast<std::size_t>(hi[i] - lo[i] + 1);
  return count;
}

LatticeModel translation_invariant_ctmc(const Box& box, double lambda, const std::vector<Jump>& jumps,
                                        std::optional<RootLink> root) {
  const std::size_t dim = box.dimension();
  if (dim == 0 || box.hi.size() != dim) throw Error(ErrorCode::InvalidBox, "box needs matching lo and hi vectors");
  for (std::size_t i = 0; i < dim; ++i) {
    if (box.lo[i] > box.hi[i]) {
      throw Error(ErrorCode::InvalidBox, "box bound lo > hi in coordinate " + std::to_string(i + 1), {i});
    }
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "jump rate must be positive");
  if (jumps.empty()) throw Error(ErrorCode::EmptySupport, "jump distribution has no support");
  double total = 0.0;
  for (std::size_t j = 0; j < jumps.size(); ++j) {
    if (jumps[j].offset.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "jump offset has the wrong dimension", {j});
    }
    if (!(jumps[j].probability >= 0.0)) {
      throw Error(ErrorCode::InvalidDistribution, "negative jump probability", {j});
    }
    total += jumps[j].probability;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidDistribution, "jump probabilities sum to " + std::to_string(total));
  }

  const std::size_t n = box.states();
  LatticeModel model{Generator::validate(Matrix::Zero(1, 1)), discrete_metric(1), {}};
  model.points.resize(n);
  std::vector<std::size_t> extent(dim), stride(dim);
  for (std::size_t i = 0; i < dim; ++i) extent[i] = static_cast<std::size_t>(box.hi[i] - box.lo[i] + 1);
  stride[dim - 1] = 1;
  for (std::size_t i = dim - 1; i-- > 0;) stride[i] = stride[i + 1] * extent[i + 1];
  for (State s = 0; s < n; ++s) {
    std::vector<long> point(dim);
    for (std::size_t i = 0; i < dim; ++i) point[i] = box.lo[i] + static_cast<long>((s / stride[i]) % extent[i]);
    model.points[s] = std::move(point);
  }

  Matrix Q = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State r = 0; r < n; ++r) {
    for (const Jump& jump : jumps) {
      State target = 0;
      for (std::size_t i = 0; i < dim; ++i) {
        const long x = std::clamp(model.points[r][i] + jump.offset[i], box.lo[i], box.hi[i]);
        target += static_cast<State>(x - box.lo[i]) * stride[i];
      }
      if (target != r) Q(r, target) += lambda * jump.probability;
    }
  }
  if (root) {
    if (root->root >= n) throw Error(ErrorCode::IndexOutOfRange, "root state outside the box", {root->root});
    if (!(root->rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "root rate must be non-negative");
    for (State r = 0; r < n; ++r) {
      if (r != root->root) Q(r, root->root) += root->rate;
    }
  }
  for (State r = 0; r < n; ++r) Q(r, r) = -Q.row(r).sum();

  Matrix dist(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (State r = 0; r < n; ++r) {
    for (State s = 0; s < n; ++s) {
      double sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double delta = static_cast<double>(model.points[r][i] - model.points[s][i]);
        sq += delta * delta;
      }
      dist(r, s) = std::sqrt(sq);
    }
  }
  model.Q = Generator::validate(std::move(Q));
  model.metric = Metric::validate(std::move(dist));
  return model;
}

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream stream(text);
  while (std::getline(stream, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

long parse_long(const std::string& text) {
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::ParseError, "expected an integer, got '" + text + "'");
  return value;
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw Error(ErrorCode::ParseError, "expected a number, got '" + text + "'");
  return value;
}

}  // namespace

Box parse_box(const std::string& text) {
  Box box;
  for (const std::string& range : split(text, ',')) {
    const auto bounds = split(range, ':');
    if (bounds.size() != 2) throw Error(ErrorCode::ParseError, "box range '" + range + "' is not lo:hi");
    box.lo.push_back(parse_long(bounds[0]));
    box.hi.push_back(parse_long(bounds[1]));
  }
  if (box.lo.empty()) throw Error(ErrorCode::ParseError, "empty box");
  return box;
}

std::vector<Jump> parse_jumps(const std::string& text) {
  std::vector<Jump> jumps;
  for (const std::string& entry : split(text, ';')) {
    const auto parts = split(entry, ':');
    if (parts.size() != 2) throw Error(ErrorCode::ParseError, "jump '" + entry + "' is not offset:probability");
    Jump jump;
    for (const std::string& c : split(parts[0], ',')) jump.offset.push_back(parse_long(c));
    jump.probability = parse_double(parts[1]);
    jumps.push_back(std::move(jump));
  }
  return jumps;
}

RandomInstance random_instance(std::size_t n, std::uint64_t seed, MetricKind kind, double density) {
  if (n < 2) throw Error(ErrorCode::SingleState, "random instances need at least two states");
  if (!(density > 0.0 && density <= 1.0)) throw Error(ErrorCode::InvalidArgument, "density must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> rate(0.1, 2.0);
  const auto N = static_cast<Eigen::Index>(n);

  Matrix Q = Matrix::Zero(N, N);
  for (Eigen::Index r = 0; r < N; ++r) {
    for (Eigen::Index s = 0; s < N; ++s) {
      if (r == s) continue;
      const double value = rate(rng);
      if (unit(rng) < density) Q(r, s) = value;
    }
    if (Q.row(r).sum() == 0.0) {
      std::uniform_int_distribution<Eigen::Index> pick(0, N - 2);
      Eigen::Index s = pick(rng);
      if (s >= r) ++s;
      Q(r, s) = rate(rng);
    }
    Q(r, r) = -Q.row(r).sum();
  }

  Matrix dist;
  switch (kind) {
    case MetricKind::Discrete:
      dist = discrete_metric(n).distances();
      break;
    case MetricKind::Line: {
      std::vector<double> positions(n);
      double x = 0.0;
      for (auto& p : positions) {
        x += 0.1 + unit(rng);
        p = x;
      }
      dist = line_metric(positions).distances();
      break;
    }
    case MetricKind::Graph: {
      std::vector<WeightedEdge> edges;
      for (State r = 0; r < n; ++r) {
        for (State s = r + 1; s < n; ++s) edges.push_back({r, s, 0.1 + 2.0 * unit(rng)});
      }
      dist = shortest_path_metric(n, edges).distances();
      break;
    }
  }

  Vector p(N);
  for (Eigen::Index s = 0; s < N; ++s) p(s) = -std::log(1.0 - unit(rng));
  p /= p.sum();
  return {Generator::validate(std::move(Q)), Metric::validate(std::move(dist)), renormalized(std::move(p))};
}

}  // namespace wbound
