#include "fica/sources.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <utility>

#include "fica/errors.hpp"
#include "fica/rng.hpp"

namespace fica {

namespace {

// E[(mu + sigma Z)^k] for standard normal Z, via the binomial expansion with
// (j-1)!! for even central powers.
double normal_moment(double mu, double sigma, int k) {
  double sum = 0.0;
  double binom = 1.0;  // C(k, j), updated incrementally
  for (int j = 0; j <= k; j += 2) {
    double dfact = 1.0;
    for (int m = j - 1; m >= 2; m -= 2) dfact *= m;
    sum += binom * std::pow(mu, k - j) * std::pow(sigma, j) * dfact;
    // advance C(k,j) -> C(k,j+2)
    if (j + 2 <= k)
      binom *= static_cast<double>((k - j) * (k - j - 1)) /
               static_cast<double>((j + 1) * (j + 2));
  }
  return sum;
}

double factorial(int k) {
  double f = 1.0;
  for (int m = 2; m <= k; ++m) f *= m;
  return f;
}

}  // namespace

SourceDistribution gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                    std::vector<double> stddevs) {
  const auto m = weights.size();
  if (m == 0 || means.size() != m || stddevs.size() != m)
    throw ValidationError("gaussian_mixture: weights/means/stddevs must be non-empty and equal length");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw ValidationError("gaussian_mixture: weights must be positive");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw ValidationError("gaussian_mixture: weights must sum to one");
  for (double& w : weights) w /= wsum;
  for (double s : stddevs)
    if (!(s >= 0.0)) throw ValidationError("gaussian_mixture: stddevs must be non-negative");

  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mean += weights[i] * means[i];
    second += weights[i] * (stddevs[i] * stddevs[i] + means[i] * means[i]);
  }
  const double var = second - mean * mean;
  if (!(var > 0.0)) throw ValidationError("gaussian_mixture: law is degenerate (zero variance)");
  const double inv_sd = 1.0 / std::sqrt(var);

  SourceDistribution s;
  s.family = Family::gaussian_mixture;
  s.weights = std::move(weights);
  s.means.resize(m);
  s.stddevs.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    s.means[i] = (means[i] - mean) * inv_sd;
    s.stddevs[i] = stddevs[i] * inv_sd;
  }
  s.shift = mean;
  s.scale_factor = inv_sd;
  return s;
}

SourceDistribution uniform(double half_width_raw) {
  if (!(half_width_raw > 0.0)) throw ValidationError("uniform: half width must be positive");
  SourceDistribution s;
  s.family = Family::uniform;
  // Var(U[-a,a]) = a^2/3, so every standardized uniform has half width sqrt 3.
  s.half_width = std::sqrt(3.0);
  s.shift = 0.0;
  s.scale_factor = std::sqrt(3.0) / half_width_raw;
  return s;
}

SourceDistribution laplace(double scale_raw) {
  if (!(scale_raw > 0.0)) throw ValidationError("laplace: scale must be positive");
  SourceDistribution s;
  s.family = Family::laplace;
  // Var = 2 b^2, so the standardized scale is 1/sqrt 2.
  s.scale = 1.0 / std::sqrt(2.0);
  s.shift = 0.0;
  s.scale_factor = 1.0 / (scale_raw * std::sqrt(2.0));
  return s;
}

SourceDistribution default_bimodal() {
  return gaussian_mixture({0.7, 0.3}, {-1.0, 7.0 / 3.0}, {1.0, 1.0});
}

double raw_moment(const SourceDistribution& s, int k) {
  if (k < 0 || k > 8) throw ValidationError("raw_moment: order must be in [0, 8]");
  if (k == 0) return 1.0;
  switch (s.family) {
    case Family::gaussian_mixture: {
      double sum = 0.0;
      for (std::size_t i = 0; i < s.weights.size(); ++i)
        sum += s.weights[i] * normal_moment(s.means[i], s.stddevs[i], k);
      return sum;
    }
    case Family::uniform:
      if (k % 2 == 1) return 0.0;
      return std::pow(s.half_width, k) / (k + 1);
    case Family::laplace:
      if (k % 2 == 1) return 0.0;
      return factorial(k) * std::pow(s.scale, k);
  }
  throw ValidationError("raw_moment: unknown family");
}

void sample(const SourceDistribution& s, std::uint64_t seed, std::int64_t n, double* out) {
  if (n < 0) throw ValidationError("sample: negative count");
  rng::Engine eng(seed);
  switch (s.family) {
    case Family::gaussian_mixture: {
      rng::Normal normal;
      const auto m = s.weights.size();
      for (std::int64_t t = 0; t < n; ++t) {
        const double u = rng::uniform01(eng);
        std::size_t c = 0;
        double acc = s.weights[0];
        while (c + 1 < m && u >= acc) acc += s.weights[++c];
        out[t] = s.means[c] + s.stddevs[c] * normal(eng);
      }
      return;
    }
    case Family::uniform: {
      for (std::int64_t t = 0; t < n; ++t)
        out[t] = (2.0 * rng::uniform01(eng) - 1.0) * s.half_width;
      return;
    }
    case Family::laplace: {
      for (std::int64_t t = 0; t < n; ++t) {
        double u = rng::uniform01(eng);
        if (u <= 0.0) u = 0x1.0p-53;  // keep log1p finite at the lattice edge
        const double v = 2.0 * u - 1.0;
        out[t] = v >= 0.0 ? -s.scale * std::log1p(-v) : s.scale * std::log1p(v);
      }
      return;
    }
  }
  throw ValidationError("sample: unknown family");
}

Matrix MixingModel::demix_target() const {
  Eigen::FullPivLU<Matrix> lu(h);
  if (!lu.isInvertible()) throw ValidationError("mixing matrix is singular");
  return lu.inverse().transpose();
}

Matrix seeded_orthogonal(int d, std::uint64_t seed) {
  if (d < 1) throw ValidationError("seeded_orthogonal: dimension must be positive");
  rng::Engine eng(seed);
  rng::Normal normal;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal(eng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Vector diag = qr.matrixQR().diagonal();
  // Fix the Q sign ambiguity so (d, seed) determines the matrix uniquely.
  for (int j = 0; j < d; ++j)
    if (diag[j] < 0.0) q.col(j) = -q.col(j);
  return q;
}

DataMatrix generate_observations(const MixingModel& model, std::int64_t n, std::uint64_t seed) {
  const int d = model.dim();
  if (d == 0 || static_cast<int>(model.sources.size()) != d)
    throw ValidationError("generate_observations: model needs one source per mixing column");
  if (n < 1) throw ValidationError("generate_observations: need at least one sample");
  DataMatrix s(d, n);
  for (int i = 0; i < d; ++i)
    sample(model.sources[i], rng::derive(seed, static_cast<std::uint64_t>(i)), n,
           s.data() + static_cast<std::int64_t>(i) * n);
  DataMatrix y = model.h * s;
  return y;
}

}  // namespace fica
