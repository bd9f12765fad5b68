// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_TYPES_HPP
#define DECOPT_TYPES_HPP

#include <Eigen/Dense>

namespace decopt
{

using Vector = Eigen::VectorXd;

// Row-major n x n storage; row i holds client i's weights.
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One d-vector per client, stored as the rows of an n x d row-major block so each
// client's vector is contiguous.
using StackedVectors = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace decopt

#endif  // DECOPT_TYPES_HPP
