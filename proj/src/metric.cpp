#include "wbound/metric.hpp"

#include "wbound/error.hpp"

#include <cmath>
#include <string>

namespace wbound {

namespace {

std::string pair_text(State r, State s) {
  return "(" + std::to_string(r + 1) + "," + std::to_string(s + 1) + ")";
}

}  // namespace

Metric Metric::validate(Matrix dist) {
  if (dist.rows() != dist.cols()) {
    throw Error(ErrorCode::NotSquare, "distance matrix is " + std::to_string(dist.rows()) + "x" +
                                          std::to_string(dist.cols()));
  }
  const auto n = static_cast<std::size_t>(dist.rows());
  double d_max = 0.0;
  for (State r = 0; r < n; ++r) {
    for (State s = 0; s < n; ++s) {
      const double d = dist(r, s);
      if (!std::isfinite(d) || d < 0.0) {
        throw Error(ErrorCode::NegativeDistance, "d" + pair_text(r, s) + " = " + std::to_string(d),
                    {r, s});
      }
      if (r == s && d != 0.0) {
        throw Error(ErrorCode::NegativeDistance,
                    "diagonal entry d" + pair_text(r, s) + " must be 0", {r, s});
      }
      if (dist(s, r) != d) {
        throw Error(ErrorCode::AsymmetricMatrix, "d" + pair_text(r, s) + " != d" + pair_text(s, r),
                    {r, s});
      }
      if (r != s && d == 0.0) {
        throw Error(ErrorCode::ZeroOffDiagonal, "d" + pair_text(r, s) + " = 0 for distinct states",
                    {r, s});
      }
      d_max = std::max(d_max, d);
    }
  }
  for (State r = 0; r < n; ++r) {
    for (State u = 0; u < n; ++u) {
      for (State s = 0; s < n; ++s) {
        if (dist(r, u) > dist(r, s) + dist(s, u) + kTriangleTolerance) {
          throw Error(ErrorCode::TriangleViolation,
                      "triangle inequality fails: d(" + std::to_string(r + 1) + "," + std::to_string(u + 1) + ") > d(" +
                          std::to_string(r + 1) + "," + std::to_string(s + 1) + ") + d(" +
                          std::to_string(s + 1) + "," + std::to_string(u + 1) + ")",
                      {r, s, u});
        }
      }
    }
  }
  return Metric(std::move(dist), d_max);
}

Metric discrete_metric(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "discrete metric needs at least one state");
  Matrix dist = Matrix::Ones(n, n);
  dist.diagonal().setZero();
  return Metric::validate(std::move(dist));
}

Metric line_metric(std::span<const double> positions) {
  const std::size_t n = positions.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "line metric needs at least one position");
  Matrix dist(n, n);
  for (State r = 0; r < n; ++r) {
    if (!std::isfinite(positions[r])) {
      throw Error(ErrorCode::InvalidArgument, "position " + std::to_string(r + 1) + " is not finite",
                  {r});
    }
    for (State s = 0; s < n; ++s) {
      dist(r, s) = std::abs(positions[r] - positions[s]);
      if (r < s && dist(r, s) == 0.0) {
        throw Error(ErrorCode::DuplicatePosition,
                    "states " + std::to_string(r + 1) + " and " + std::to_string(s + 1) +
                        " share a position",
                    {r, s});
      }
    }
  }
  return Metric::validate(std::move(dist));
}

Metric shortest_path_metric(std::size_t n, std::span<const WeightedEdge> edges) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "graph metric needs at least one state");
  Matrix dist = Matrix::Constant(n, n, kInfinity);
  dist.diagonal().setZero();
  for (const auto& e : edges) {
    if (e.from >= n || e.to >= n) {
      throw Error(ErrorCode::IndexOutOfRange, "edge endpoint outside 1.." + std::to_string(n),
                  {e.from, e.to});
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorCode::InvalidWeight, "edge weights must be positive and finite",
                  {e.from, e.to});
    }
    if (e.from == e.to) continue;
    dist(e.from, e.to) = std::min(dist(e.from, e.to), e.weight);
    dist(e.to, e.from) = dist(e.from, e.to);
  }
  // Floyd-Warshall
  for (State k = 0; k < n; ++k) {
    for (State i = 0; i < n; ++i) {
      const double dik = dist(i, k);
      if (dik == kInfinity) continue;
      for (State j = 0; j < n; ++j) {
        const double via = dik + dist(k, j);
        if (via < dist(i, j)) dist(i, j) = via;
      }
    }
  }
  for (State r = 0; r < n; ++r) {
    for (State s = r + 1; s < n; ++s) {
      if (dist(r, s) == kInfinity) {
        throw Error(ErrorCode::DisconnectedGraph,
                    "no path between " + std::to_string(r + 1) + " and " + std::to_string(s + 1),
                    {r, s});
      }
    }
  }
  // Path sums can differ in the last bit depending on direction.
  const Matrix symmetric = 0.5 * (dist + dist.transpose());
  return Metric::validate(symmetric);
}

Metric product_metric(std::span<const WeightedMetric> components) {
  if (components.empty()) throw Error(ErrorCode::EmptyProduct, "product of zero metrics");
  std::size_t n = 1;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::InvalidWeight, "product weights must be positive and finite");
    }
    n *= c.metric.size();
  }
  Matrix dist = Matrix::Zero(n, n);
  // stride of component k = product of sizes of components after k
  std::vector<std::size_t> stride(components.size(), 1);
  for (std::size_t k = components.size(); k-- > 1;) {
    stride[k - 1] = stride[k] * components[k].metric.size();
  }
  for (State r = 0; r < n; ++r) {
    for (State s = 0; s < n; ++s) {
      double d = 0.0;
      for (std::size_t k = 0; k < components.size(); ++k) {
        const std::size_t size = components[k].metric.size();
        const State rk = (r / stride[k]) % size;
        const State sk = (s / stride[k]) % size;
        d += components[k].weight * components[k].metric(rk, sk);
      }
      dist(r, s) = d;
    }
  }
  return Metric::validate(std::move(dist));
}

}  // namespace wbound
