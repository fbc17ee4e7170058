#pragma once

#include <vector>

#include "fica/linalg.hpp"

namespace fica {

// Gain matrix G = W^T * sphering * H. Under perfect separation G is a signed
// permutation; its deviation from I (after alignment) is the separation error.
Matrix gain_matrix(const Matrix& w, const Matrix& sphering, const Matrix& h);

// Resolution of the permutation/sign ambiguity of one estimate.
struct GainSample {
  Matrix g_raw;
  Matrix g_aligned;            // diag(signs) * P * g_raw, positive diagonal
  // permutation[p] = source index matched to component p (the p-th column of
  // W); for the deflationary algorithm this is the realized extraction order.
  std::vector<int> permutation;
  std::vector<double> signs;   // +-1 per aligned row (indexed by source)
  // Two assignments within tie_tol of the same objective: alignment is not
  // trustworthy and the trial is excluded from statistics.
  bool ambiguous = false;
};

// Permutation chosen to maximize sum_i |G[i, pi(i)]| by optimal assignment;
// signs flip rows so the aligned diagonal is positive. The tie check is
// exhaustive for d <= 7 and skipped above that (experiments here are small).
GainSample align(const Matrix& g, double tie_tol = 1e-6);

// Optimal assignment maximizing sum_i scores(i, pi(i)); returns pi as a
// row -> column map. O(d^3) Hungarian method.
std::vector<int> max_assignment(const Matrix& scores);

}  // namespace fica
