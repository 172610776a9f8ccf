#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace tahg {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;

// Row-major so that one row is one node (or hyperedge) embedding.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace tahg
