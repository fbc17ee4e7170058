#include <cmath>

#include "doctest.h"
#include "fica/errors.hpp"
#include "fica/linalg.hpp"
#include "fica/rng.hpp"

using namespace fica;

namespace {

Matrix random_matrix(int r, int c, std::uint64_t seed) {
  Matrix m(r, c);
  rng::Engine g(seed);
  rng::Normal normal;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = normal(g);
  return m;
}

Matrix random_spd(int d, std::uint64_t seed) {
  const Matrix a = random_matrix(d, d, seed);
  return a * a.transpose() + 0.1 * Matrix::Identity(d, d);
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("inv_sqrt produces the symmetric inverse square root") {
  for (int d : {2, 3, 5, 6}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Matrix s = random_spd(d, rng::derive(100 + d, seed));
      const Matrix r = inv_sqrt(s);
      CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((r * s * r - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("inv_sqrt handles a wide eigenvalue spread") {
  const Matrix q = random_matrix(3, 3, rng::derive(7, 1)).householderQr().householderQ();
  Vector ev(3);
  ev << 1.0, 1e-6, 1e-9;
  const Matrix s = q * ev.asDiagonal() * q.transpose();
  const Matrix r = inv_sqrt(s);
  // Residual grows with the condition number; 1e9 condition leaves ~1e-7.
  CHECK((r * s * r - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("inv_sqrt rejects singular and indefinite input") {
  Vector v(3);
  v << 1.0, 2.0, -1.0;
  const Matrix rank1 = v * v.transpose();
  CHECK_THROWS_AS(inv_sqrt(rank1), NumericalError);

  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(inv_sqrt(indefinite), NumericalError);
}

TEST_CASE("sym_orth equals the svd polar factor") {
  for (int d : {2, 3, 5}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const Matrix w = random_matrix(d, d, rng::derive(200 + d, seed));
      const Matrix q = sym_orth(w);
      CHECK((q.transpose() * q - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);

      Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Matrix polar = svd.matrixU() * svd.matrixV().transpose();
      CHECK((q - polar).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("sym_orth leaves an orthogonal matrix alone") {
  const Matrix q = random_matrix(4, 4, rng::derive(8, 2)).householderQr().householderQ();
  CHECK((sym_orth(q) - q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance divides by N, not N-1") {
  DataMatrix x(1, 3);
  x << 1.0, 2.0, 3.0;
  // Mean 2, scatter 2, so 1/N gives exactly 2/3.
  CHECK(covariance(x)(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  Vector zero = Vector::Zero(1);
  CHECK(covariance(x, zero)(0, 0) == doctest::Approx(14.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("covariance matches a direct computation") {
  const int d = 3;
  const std::int64_t n = 257;
  DataMatrix x(d, n);
  rng::Engine g(rng::derive(9, 3));
  rng::Normal normal;
  for (int i = 0; i < d; ++i)
    for (std::int64_t t = 0; t < n; ++t) x(i, t) = normal(g);

  const Vector mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - mean;
  const Matrix ref = centered * centered.transpose() / double(n);
  CHECK((covariance(x) - ref).cwiseAbs().maxCoeff() < 1e-13);

  Vector c = Vector::Constant(d, 0.5);
  const Matrix shifted = x.colwise() - c;
  const Matrix ref_c = shifted * shifted.transpose() / double(n);
  CHECK((covariance(x, c) - ref_c).cwiseAbs().maxCoeff() < 1e-13);
}

}  // TEST_SUITE
