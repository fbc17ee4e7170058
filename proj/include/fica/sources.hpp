#pragma once

#include <cstdint>
#include <vector>

#include "fica/linalg.hpp"

namespace fica {

enum class Family { gaussian_mixture, uniform, laplace };

// A scalar source law, stored in standardized form: zero mean, unit variance.
// The affine map applied during standardization is kept for reproducibility.
struct SourceDistribution {
  Family family = Family::gaussian_mixture;

  // gaussian_mixture: component parameters after standardization.
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stddevs;

  // uniform: support is [-half_width, half_width]; laplace: density
  // exp(-|z|/scale) / (2*scale). Both post-standardization.
  double half_width = 0.0;
  double scale = 0.0;

  // z = (raw - shift) * scale_factor
  double shift = 0.0;
  double scale_factor = 1.0;
};

// Factories standardize raw parameters and validate them. Degenerate input
// (zero variance, bad weights) raises ValidationError.
SourceDistribution gaussian_mixture(std::vector<double> weights, std::vector<double> means,
                                    std::vector<double> stddevs);
SourceDistribution uniform(double half_width_raw);
SourceDistribution laplace(double scale_raw);

// Canonical asymmetric bimodal law used by the experiment defaults:
// weights (0.7, 0.3), means (-1, 7/3), unit component stddevs, standardized.
SourceDistribution default_bimodal();

// Exact k-th moment of the standardized law, closed form, k <= 8.
double raw_moment(const SourceDistribution& s, int k);

// n i.i.d. draws; identical (seed, n) give bit-identical output.
void sample(const SourceDistribution& s, std::uint64_t seed, std::int64_t n, double* out);

struct MixingModel {
  Matrix h;                              // d x d, full rank
  std::vector<SourceDistribution> sources;  // d entries

  int dim() const { return static_cast<int>(h.rows()); }
  // Demixing target B = (H^{-1})^T whose columns the algorithms estimate.
  Matrix demix_target() const;
  // Population moments of y = H s: E[y] = 0, Cov(y) = H H^T.
  Vector mean_y() const { return Vector::Zero(h.rows()); }
  Matrix cov_y() const { return h * h.transpose(); }
};

// Random orthogonal matrix from the QR factorization of a seeded Gaussian
// matrix, sign-fixed so the result is unique.
Matrix seeded_orthogonal(int d, std::uint64_t seed);

// Observation block y(t) = H s(t), t = 1..n. Source i draws from an
// independent stream derived from (seed, i), so generate(H) == H * generate(I)
// exactly for a shared seed.
DataMatrix generate_observations(const MixingModel& model, std::int64_t n, std::uint64_t seed);

}  // namespace fica
