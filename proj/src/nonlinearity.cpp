#include "fica/nonlinearity.hpp"

#include <cmath>
#include <cstddef>

#include "fica/errors.hpp"
#include "fica/quadrature.hpp"

namespace fica {

namespace {

double pow3_g(double u) { return u * u * u; }
double pow3_gp(double u) { return 3.0 * u * u; }
double pow3_G(double u) { return 0.25 * u * u * u * u; }

double tanh_g(double u) { return std::tanh(u); }
double tanh_gp(double u) {
  const double t = std::tanh(u);
  return 1.0 - t * t;
}
// log cosh u = |u| + log(1 + e^{-2|u|}) - log 2, stable for large |u|.
double tanh_G(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453094;
}

double gauss_g(double u) { return u * std::exp(-0.5 * u * u); }
double gauss_gp(double u) { return (1.0 - u * u) * std::exp(-0.5 * u * u); }
double gauss_G(double u) { return -std::exp(-0.5 * u * u); }

const Nonlinearity kPow3{"pow3", kernels::Contrast::pow3, pow3_g, pow3_gp, pow3_G};
const Nonlinearity kTanh{"tanh", kernels::Contrast::tanh, tanh_g, tanh_gp, tanh_G};
const Nonlinearity kGauss{"gauss", kernels::Contrast::gauss, gauss_g, gauss_gp, gauss_G};

// Accumulates the four g-dependent expectations over quadrature nodes.
struct GAccum {
  double gp = 0, gz = 0, gg = 0, g1 = 0;

  void add(const Nonlinearity& nl, double z, double weight) {
    const double g = nl.g(z);
    gp += weight * nl.g_prime(z);
    gz += weight * g * z;
    gg += weight * g * g;
    g1 += weight * g;
  }
};

GAccum integrate(const SourceDistribution& dist, const Nonlinearity& nl, int nodes) {
  GAccum acc;
  switch (dist.family) {
    case Family::gaussian_mixture: {
      const auto rule = quadrature::gauss_hermite(nodes);
      const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
      for (std::size_t c = 0; c < dist.weights.size(); ++c) {
        const double mu = dist.means[c];
        const double sqrt2_sigma = std::sqrt(2.0) * dist.stddevs[c];
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
          acc.add(nl, mu + sqrt2_sigma * rule.nodes[i],
                  dist.weights[c] * inv_sqrt_pi * rule.weights[i]);
      }
      return acc;
    }
    case Family::uniform: {
      const auto rule = quadrature::gauss_legendre(nodes);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc.add(nl, dist.half_width * rule.nodes[i], 0.5 * rule.weights[i]);
      return acc;
    }
    case Family::laplace: {
      // E[h(z)] = (1/2) int_0^inf (h(bt) + h(-bt)) e^{-t} dt
      const auto rule = quadrature::gauss_laguerre(nodes);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double z = dist.scale * rule.nodes[i];
        acc.add(nl, z, 0.5 * rule.weights[i]);
        acc.add(nl, -z, 0.5 * rule.weights[i]);
      }
      return acc;
    }
  }
  throw ValidationError("compute_moments: unknown family");
}

}  // namespace

const Nonlinearity& builtin_nonlinearity(std::string_view name) {
  if (name == "pow3") return kPow3;
  if (name == "tanh") return kTanh;
  if (name == "gauss") return kGauss;
  throw ValidationError("unknown nonlinearity (expected pow3, tanh, or gauss)");
}

MomentSet compute_moments(const SourceDistribution& dist, const Nonlinearity& nl,
                          const MomentOptions& opt) {
  if (opt.quad_nodes < 1) throw ValidationError("compute_moments: quad_nodes must be positive");
  MomentSet m;
  // The kurtosis and skewness slots never involve g; closed forms are exact.
  m.tau = (raw_moment(dist, 4) - 1.0) / 4.0;
  m.skew = raw_moment(dist, 3);

  if (nl.kind == kernels::Contrast::pow3 && !opt.force_quadrature) {
    // g = z^3 reduces every expectation to a raw moment.
    m.alpha = 3.0 - raw_moment(dist, 4);
    m.beta = raw_moment(dist, 6);
    m.gamma = raw_moment(dist, 4);
    m.eta = raw_moment(dist, 3);
  } else {
    const GAccum acc = integrate(dist, nl, opt.quad_nodes);
    m.alpha = acc.gp - acc.gz;
    m.beta = acc.gg;
    m.gamma = acc.gz;
    m.eta = acc.g1;
  }
  m.separable = std::abs(m.alpha) >= opt.alpha_tol;
  return m;
}

}  // namespace fica
