#pragma once

#include <cstdint>
#include <vector>

#include "fica/linalg.hpp"
#include "fica/nonlinearity.hpp"

namespace fica {

enum class Algorithm { dfl, sym };

// Iterations always run in pairs: the raw fixed-point map can 2-cycle between
// w and -w, and a pair composes the flip away. Convergence is therefore
// measured across two raw updates.
struct IterationPolicy {
  double tol = 1e-10;   // on 1 - |<w_new, w_old>| across a pair
  int max_sweeps = 500; // raw update/sweep budget per component; even
};

struct UnmixResult {
  // Orthonormal columns w_1..w_d; for the deflationary algorithm the column
  // index is the extraction position.
  Matrix w;
  std::vector<int> sweeps_used;   // per component
  std::vector<bool> converged;    // per component

  bool all_converged() const {
    for (bool c : converged)
      if (!c) return false;
    return true;
  }
};

// One raw fixed-point step: E_hat[g'(w^T x)] * w - E_hat[g(w^T x) x].
// Single pass over the samples; not normalized.
Vector one_unit_update(const Vector& w, const DataMatrix& x, const Nonlinearity& nl);

// Sequential extraction: update, Gram-Schmidt deflation against the already
// fixed components, normalization; stop per component when a pair of updates
// moves w by less than tol, or the sweep budget runs out (converged=false,
// best iterate kept).
UnmixResult deflationary(const DataMatrix& x, const Nonlinearity& nl, const Matrix& w_init,
                         const IterationPolicy& policy = {});

// Parallel extraction: every column updated from the current W, then the
// polar-factor orthogonalization W <- (W W^T)^{-1/2} W; convergence when
// 1 - min_i |<w_i_new, w_i_old>| < tol across a pair of sweeps.
UnmixResult symmetric(const DataMatrix& x, const Nonlinearity& nl, const Matrix& w_init,
                      const IterationPolicy& policy = {});

// Deterministic random orthonormal init (QR of a seeded Gaussian matrix).
Matrix random_orthonormal(int d, std::uint64_t seed);

}  // namespace fica
