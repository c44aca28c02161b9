#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>

namespace wbound {

using Vector = Eigen::VectorXd;
// Row-major so that row access (rows of Q, P, A, D) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using State = std::size_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace wbound
