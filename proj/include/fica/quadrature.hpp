#pragma once

#include <vector>

namespace fica::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Nodes and weights computed by the Golub-Welsch method (eigendecomposition
// of the Jacobi matrix), exact for polynomials up to degree 2n-1 under the
// respective weight function.

Rule gauss_hermite(int n);   // weight exp(-x^2) on (-inf, inf)
Rule gauss_legendre(int n);  // weight 1 on [-1, 1]
Rule gauss_laguerre(int n);  // weight exp(-x) on [0, inf)

}  // namespace fica::quadrature
