#pragma once

#include <Eigen/Dense>
#include <optional>

namespace fica {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Sample blocks are d x N with each channel's row contiguous, so the bulk
// kernels can stream them.
using DataMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Symmetric inverse square root of an SPD matrix via eigendecomposition,
// i.e. the matrix R with R*M*R = I and R = R^T. Eigenvalues at or below
// eig_floor_rel * lambda_max raise NumericalError (singular covariance).
Matrix inv_sqrt(const Matrix& m, double eig_floor_rel = 1e-12);

// Orthogonal polar factor (W W^T)^{-1/2} W of a full-rank square matrix:
// the nearest orthogonal matrix to W in Frobenius norm.
Matrix sym_orth(const Matrix& w);

// 1/N-normalized scatter about the given center, or about the empirical mean
// when center is absent. Deliberately 1/N, not 1/(N-1).
Matrix covariance(const DataMatrix& x, const std::optional<Vector>& center = std::nullopt);

}  // namespace fica
