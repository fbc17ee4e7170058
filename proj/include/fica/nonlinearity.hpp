#pragma once

#include <string>
#include <string_view>

#include "fica/kernels.hpp"
#include "fica/sources.hpp"

namespace fica {

// Contrast nonlinearity g, its derivative and primitive. The kernel id lets
// the bulk expectation pass evaluate g/g' vectorized.
struct Nonlinearity {
  std::string name;
  kernels::Contrast kind;
  double (*g)(double);
  double (*g_prime)(double);
  double (*G_primitive)(double);
};

// pow3: g(u)=u^3, g'=3u^2, G=u^4/4
// tanh: g=tanh(u), g'=1-tanh^2(u), G=log cosh(u)
// gauss: g=u*exp(-u^2/2), g'=(1-u^2)exp(-u^2/2), G=-exp(-u^2/2)
const Nonlinearity& builtin_nonlinearity(std::string_view name);

// Expectations of one source/nonlinearity pair under z ~ dist (standardized):
//   alpha = E[g'(z) - g(z) z],  beta = E[g(z)^2],  gamma = E[g(z) z],
//   eta = E[g(z)],  tau = (E[z^4] - 1)/4,  skew = E[z^3].
struct MomentSet {
  double alpha = 0, beta = 0, gamma = 0, eta = 0, tau = 0, skew = 0;
  // False when |alpha| < alpha_tol: the fixed point is degenerate for this
  // source/nonlinearity pair and every variance denominator vanishes.
  bool separable = true;
};

struct MomentOptions {
  int quad_nodes = 64;
  double alpha_tol = 1e-8;
  // pow3 normally goes through the closed-form raw-moment path; this forces
  // the quadrature path instead (the two are tested to agree).
  bool force_quadrature = false;
};

MomentSet compute_moments(const SourceDistribution& dist, const Nonlinearity& nl,
                          const MomentOptions& opt = {});

}  // namespace fica
