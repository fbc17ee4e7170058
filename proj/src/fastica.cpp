#include "fica/fastica.hpp"

#include <cmath>

#include "fica/errors.hpp"
#include "fica/kernels.hpp"
#include "fica/sources.hpp"

namespace fica {

namespace {

void check_inputs(const DataMatrix& x, const Matrix& w_init, const IterationPolicy& policy) {
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("fastica: empty data");
  if (w_init.rows() != x.rows() || w_init.cols() != x.rows())
    throw ValidationError("fastica: w_init must be d x d for d-channel data");
  if (!(policy.tol > 0.0)) throw ValidationError("fastica: tol must be positive");
  if (policy.max_sweeps < 2 || policy.max_sweeps % 2 != 0)
    throw ValidationError("fastica: max_sweeps must be even and at least 2");
}

}  // namespace

Vector one_unit_update(const Vector& w, const DataMatrix& x, const Nonlinearity& nl) {
  const int d = static_cast<int>(x.rows());
  const std::int64_t n = x.cols();
  if (w.size() != d || n == 0) throw ValidationError("one_unit_update: dimension mismatch");
  double gp_sum = 0.0;
  Vector gx_sum(d);
  kernels::contrast_pass(nl.kind, x.data(), d, n, w.data(), &gp_sum, gx_sum.data());
  const double inv_n = 1.0 / static_cast<double>(n);
  return (gp_sum * inv_n) * w - inv_n * gx_sum;
}

UnmixResult deflationary(const DataMatrix& x, const Nonlinearity& nl, const Matrix& w_init,
                         const IterationPolicy& policy) {
  check_inputs(x, w_init, policy);
  const int d = static_cast<int>(x.rows());

  UnmixResult res;
  res.w = Matrix::Zero(d, d);
  res.sweeps_used.assign(d, 0);
  res.converged.assign(d, false);

  for (int i = 0; i < d; ++i) {
    // Deflate against the components already fixed, then renormalize. Applied
    // to the init too, so a w_init column inside their span fails loudly
    // instead of extracting a stale direction.
    auto deflate = [&](Vector v) {
      for (int j = 0; j < i; ++j) v -= res.w.col(j) * (res.w.col(j).dot(v));
      const double norm = v.norm();
      if (!(norm > 1e-12)) throw NumericalError("deflationary: direction collapsed");
      return Vector(v / norm);
    };

    Vector w = deflate(w_init.col(i));
    while (res.sweeps_used[i] < policy.max_sweeps) {
      const Vector before_pair = w;
      w = deflate(one_unit_update(w, x, nl));
      w = deflate(one_unit_update(w, x, nl));
      res.sweeps_used[i] += 2;
      if (1.0 - std::abs(w.dot(before_pair)) < policy.tol) {
        res.converged[i] = true;
        break;
      }
    }
    res.w.col(i) = w;
  }
  return res;
}

UnmixResult symmetric(const DataMatrix& x, const Nonlinearity& nl, const Matrix& w_init,
                      const IterationPolicy& policy) {
  check_inputs(x, w_init, policy);
  const int d = static_cast<int>(x.rows());

  UnmixResult res;
  res.sweeps_used.assign(d, 0);
  res.converged.assign(d, false);

  Matrix w = sym_orth(w_init);
  int sweeps = 0;
  bool converged = false;
  while (sweeps < policy.max_sweeps) {
    const Matrix before_pair = w;
    for (int half = 0; half < 2; ++half) {
      Matrix v(d, d);
      for (int i = 0; i < d; ++i) v.col(i) = one_unit_update(w.col(i), x, nl);
      w = sym_orth(v);
    }
    sweeps += 2;
    double worst = 0.0;
    for (int i = 0; i < d; ++i)
      worst = std::max(worst, 1.0 - std::abs(w.col(i).dot(before_pair.col(i))));
    if (worst < policy.tol) {
      converged = true;
      break;
    }
  }

  res.w = w;
  for (int i = 0; i < d; ++i) {
    res.sweeps_used[i] = sweeps;
    res.converged[i] = converged;
  }
  return res;
}

Matrix random_orthonormal(int d, std::uint64_t seed) { return seeded_orthogonal(d, seed); }

}  // namespace fica
