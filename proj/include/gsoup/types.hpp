#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace gsoup {

using NodeId = std::int32_t;
using EdgeIndex = std::int64_t;

// Row-major so node-feature rows map directly onto the on-disk layout
// (features.bin is row-major little-endian float32).
template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using MatrixF = DenseMatrix<float>;
using MatrixD = DenseMatrix<double>;

}  // namespace gsoup
