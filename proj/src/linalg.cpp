#include "fica/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fica/errors.hpp"
#include "fica/kernels.hpp"

namespace fica {

Matrix inv_sqrt(const Matrix& m, double eig_floor_rel) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ValidationError("inv_sqrt: matrix must be square and non-empty");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw NumericalError("inv_sqrt: eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  const double floor = eig_floor_rel * ev.cwiseAbs().maxCoeff();
  Vector inv_root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev[i] > floor))
      throw NumericalError("inv_sqrt: matrix is not positive definite");
    inv_root[i] = 1.0 / std::sqrt(ev[i]);
  }
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

Matrix sym_orth(const Matrix& w) {
  if (w.rows() != w.cols() || w.rows() == 0)
    throw ValidationError("sym_orth: matrix must be square and non-empty");
  // Polar factor: W (W^T W)^{-1/2}. Gram matrix is symmetric PSD by
  // construction; inv_sqrt rejects it when W is rank deficient. A single
  // projection leaves an orthogonality defect of order cond(W)^2 * eps, so
  // one re-projection of the nearly orthogonal result follows; that is one
  // step of the Newton polar iteration and converges quadratically.
  const Matrix once = w * inv_sqrt(w.transpose() * w);
  return once * inv_sqrt(once.transpose() * once);
}

Matrix covariance(const DataMatrix& x, const std::optional<Vector>& center) {
  const int d = static_cast<int>(x.rows());
  const std::int64_t n = x.cols();
  if (d == 0 || n == 0) throw ValidationError("covariance: empty data");

  Vector mu(d);
  if (center) {
    if (center->size() != d)
      throw ValidationError("covariance: center dimension mismatch");
    mu = *center;
  } else {
    kernels::row_means(x.data(), d, n, mu.data());
  }
  Matrix out(d, d);
  kernels::scatter(x.data(), d, n, mu.data(), out.data());
  // Normalized by N, matching the estimators whose spread this library
  // predicts; the N-1 convention would shift every scenario-3/4 answer.
  out /= static_cast<double>(n);
  return out;
}

}  // namespace fica
