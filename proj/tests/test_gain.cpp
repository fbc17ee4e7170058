#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fica/errors.hpp"
#include "fica/gain.hpp"
#include "fica/rng.hpp"

using namespace fica;

namespace {

Matrix random_matrix(int d, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  rng::Engine eng(seed);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = lo + (hi - lo) * rng::uniform01(eng);
  return m;
}

double brute_force_best(const Matrix& scores) {
  const int d = static_cast<int>(scores.rows());
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1e300;
  do {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += scores(i, perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_SUITE("gain") {

TEST_CASE("gain of the exact inverse is the identity") {
  const Matrix h = random_matrix(3, 44) + 3.0 * Matrix::Identity(3, 3);
  const Matrix c = Matrix::Identity(3, 3);
  const Matrix w = h.inverse().transpose();
  CHECK((gain_matrix(w, c, h) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gain_matrix validates shapes") {
  CHECK_THROWS_AS(gain_matrix(Matrix::Identity(2, 2), Matrix::Identity(3, 3),
                              Matrix::Identity(3, 3)),
                  ValidationError);
  CHECK_THROWS_AS(gain_matrix(Matrix::Identity(3, 3), Matrix::Identity(3, 3),
                              Matrix::Identity(2, 2)),
                  ValidationError);
  CHECK_THROWS_AS(align(Matrix::Zero(2, 3)), ValidationError);
  CHECK_THROWS_AS(max_assignment(Matrix::Zero(0, 0)), ValidationError);
}

TEST_CASE("assignment matches exhaustive search") {
  for (int d : {2, 3, 4}) {
    for (int rep = 0; rep < 200; ++rep) {
      const Matrix scores = random_matrix(d, rng::derive(900 + d, rep), -2.0, 2.0);
      const std::vector<int> pi = max_assignment(scores);
      REQUIRE(static_cast<int>(pi.size()) == d);
      std::vector<bool> seen(d, false);
      double got = 0.0;
      for (int i = 0; i < d; ++i) {
        REQUIRE(pi[i] >= 0);
        REQUIRE(pi[i] < d);
        CHECK_FALSE(seen[pi[i]]);
        seen[pi[i]] = true;
        got += scores(i, pi[i]);
      }
      CHECK(got == doctest::Approx(brute_force_best(scores)).epsilon(1e-12));
    }
  }
}

TEST_CASE("a near-identity gain aligns to itself") {
  const Matrix g = Matrix::Identity(3, 3) + 0.05 * random_matrix(3, 7);
  const GainSample s = align(g);
  CHECK_FALSE(s.ambiguous);
  CHECK(s.permutation == std::vector<int>{0, 1, 2});
  CHECK(s.signs == std::vector<double>{1.0, 1.0, 1.0});
  CHECK((s.g_aligned - g).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.g_raw - g).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("alignment undoes a planted signed permutation") {
  // Component p carries source sigma(p) with a sign flip; alignment must
  // recover the underlying near-identity gain exactly.
  Matrix a = Matrix::Identity(3, 3) + 0.08 * random_matrix(3, 12);
  const std::vector<int> sigma{2, 0, 1};
  const std::vector<double> flip{-1.0, 1.0, -1.0};
  Matrix g(3, 3);
  for (int p = 0; p < 3; ++p) g.row(p) = flip[p] * a.row(sigma[p]);

  const GainSample s = align(g);
  CHECK_FALSE(s.ambiguous);
  CHECK(s.permutation == sigma);
  CHECK((s.g_aligned - a).cwiseAbs().maxCoeff() == 0.0);
  for (int p = 0; p < 3; ++p) CHECK(s.signs[sigma[p]] == flip[p]);
}

TEST_CASE("an exact tie is flagged ambiguous") {
  Matrix g(2, 2);
  g << 0.5, 0.5, 0.5, 0.5;
  CHECK(align(g).ambiguous);
  // Clearly separated magnitudes are not.
  g << 0.9, 0.1, -0.2, 0.8;
  CHECK_FALSE(align(g).ambiguous);
}

TEST_CASE("aligned diagonals are positive for arbitrary input") {
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix g = random_matrix(4, rng::derive(3000, rep), -3.0, 3.0);
    const GainSample s = align(g);
    std::vector<bool> seen(4, false);
    for (int p = 0; p < 4; ++p) {
      seen[s.permutation[p]] = true;
      CHECK(std::abs(s.signs[p]) == 1.0);
    }
    CHECK(std::count(seen.begin(), seen.end(), true) == 4);
    if (!s.ambiguous)
      for (int j = 0; j < 4; ++j) CHECK(s.g_aligned(j, j) > 0.0);
  }
}

}  // TEST_SUITE
