// Gaussian quadrature rules via the Golub-Welsch eigenvalue method: nodes are
// the eigenvalues of the Jacobi matrix of the orthogonal-polynomial recurrence,
// weights are mu0 times the squared first eigenvector components.

#include "fica/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fica/errors.hpp"
#include "fica/linalg.hpp"

namespace fica::quadrature {

namespace {

Rule golub_welsch(const Vector& diag, const Vector& offdiag, double mu0) {
  const auto n = diag.size();
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.computeFromTridiagonal(diag, offdiag);
  if (es.info() != Eigen::Success)
    throw NumericalError("quadrature: Jacobi matrix eigendecomposition failed");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

}  // namespace

Rule gauss_hermite(int n) {
  if (n < 1) throw ValidationError("gauss_hermite: need at least one node");
  Vector diag = Vector::Zero(n);
  Vector off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(k / 2.0);
  return golub_welsch(diag, off, std::sqrt(M_PI));
}

Rule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: need at least one node");
  Vector diag = Vector::Zero(n);
  Vector off(n - 1);
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(diag, off, 2.0);
}

Rule gauss_laguerre(int n) {
  if (n < 1) throw ValidationError("gauss_laguerre: need at least one node");
  Vector diag(n);
  Vector off(n - 1);
  for (int k = 0; k < n; ++k) diag[k] = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) off[k - 1] = static_cast<double>(k);
  return golub_welsch(diag, off, 1.0);
}

}  // namespace fica::quadrature
