#include <cmath>
#include <vector>

#include "doctest.h"
#include "fica/asymptotics.hpp"
#include "fica/errors.hpp"
#include "fica/nonlinearity.hpp"
#include "fica/sources.hpp"

using namespace fica;

namespace {

// Three identical strongly sub-gaussian sources behind an identity mix: every
// hand-derived rational value below comes from alpha = 6/5, beta = 27/7,
// gamma = 9/5, eta = 0, tau = 1/5.
TheoryInput uniform_pow3_input() {
  MixingModel model{Matrix::Identity(3, 3), {uniform(1.0), uniform(1.0), uniform(1.0)}};
  return make_theory_input(model, builtin_nonlinearity("pow3"));
}

// Mixed sources with a skewed one in front, generic mixing: the stress input
// for identities that must hold for arbitrary moment combinations.
TheoryInput mixed_tanh_input(std::vector<int> order = {}) {
  Matrix h = seeded_orthogonal(3, 61);
  h(0, 2) += 0.7;
  h(1, 1) *= 1.6;
  MixingModel model{h, {default_bimodal(), uniform(1.0), laplace(1.0)}};
  TheoryInput in = make_theory_input(model, builtin_nonlinearity("tanh"));
  in.extraction_order = std::move(order);
  return in;
}

const std::vector<Scenario> kScenarios{Scenario::s1, Scenario::s2, Scenario::s3,
                                       Scenario::s4};

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("theory input inverts the mixing and rejects bad orders") {
  Matrix h = seeded_orthogonal(3, 8);
  h(2, 1) += 0.4;
  MixingModel model{h, {uniform(1.0), laplace(1.0), default_bimodal()}};
  const TheoryInput in = make_theory_input(model, builtin_nonlinearity("gauss"));
  CHECK((in.b.transpose() * h - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  REQUIRE(in.moments.size() == 3);

  TheoryInput bad = in;
  bad.extraction_order = {0, 1};
  CHECK_THROWS_AS(dfl_cov(0, Scenario::s1, bad), ValidationError);
  bad.extraction_order = {0, 1, 1};
  CHECK_THROWS_AS(dfl_cov(0, Scenario::s1, bad), ValidationError);
  CHECK_THROWS_AS(dfl_cov(3, Scenario::s1, in), ValidationError);
  CHECK_THROWS_AS(sym_cov(-1, Scenario::s1, in), ValidationError);
}

TEST_CASE("a vanishing contrast moment makes the theory refuse") {
  MixingModel model{Matrix::Identity(2, 2),
                    {uniform(1.0), gaussian_mixture({1.0}, {0.0}, {1.0})}};
  const TheoryInput in = make_theory_input(model, builtin_nonlinearity("pow3"));
  CHECK_THROWS_AS(dfl_cov(0, Scenario::s1, in), NumericalError);
  CHECK_THROWS_AS(sym_gain_variance(0, 1, Scenario::s1, in), NumericalError);
  CHECK_THROWS_AS(variance_table(Algorithm::sym, Scenario::s1, in), NumericalError);
}

TEST_CASE("deflationary variances, hand-derived rational values") {
  const TheoryInput in = uniform_pow3_input();

  // Scenario 1: beta/alpha^2 = 75/28 on both sides of the diagonal for the
  // default reading; the literal printed coefficient squares beta for the
  // already-extracted side only.
  CHECK(dfl_gain_variance(1, 0, Scenario::s1, in) ==
        doctest::Approx(75.0 / 28.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(0, 1, Scenario::s1, in) ==
        doctest::Approx(75.0 / 28.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(1, 0, Scenario::s1, in, DflVariant::printed) ==
        doctest::Approx(2025.0 / 196.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(0, 1, Scenario::s1, in, DflVariant::printed) ==
        doctest::Approx(75.0 / 28.0).epsilon(1e-14));

  // Symmetric sources: empirical centering costs nothing.
  CHECK(dfl_gain_variance(1, 0, Scenario::s2, in) ==
        doctest::Approx(75.0 / 28.0).epsilon(1e-14));

  // Scenario 3: (beta - gamma^2)/alpha^2 = 3/7 after extraction, plus one for
  // the components still to come.
  CHECK(dfl_gain_variance(0, 1, Scenario::s3, in) ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(1, 0, Scenario::s3, in) ==
        doctest::Approx(10.0 / 7.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(0, 1, Scenario::s4, in) ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-14));

  // Diagonal: exactly zero under theoretical whitening, tau after empirical.
  CHECK(dfl_gain_variance(1, 1, Scenario::s1, in) == 0.0);
  CHECK(dfl_gain_variance(1, 1, Scenario::s2, in) == 0.0);
  CHECK(dfl_gain_variance(1, 1, Scenario::s3, in) ==
        doctest::Approx(0.2).epsilon(1e-14));
  CHECK(dfl_gain_variance(1, 1, Scenario::s4, in) ==
        doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("symmetric variances, hand-derived rational values") {
  const TheoryInput in = uniform_pow3_input();
  CHECK(sym_gain_variance(0, 1, Scenario::s1, in) ==
        doctest::Approx(3.0 / 14.0).epsilon(1e-14));
  CHECK(sym_gain_variance(2, 1, Scenario::s2, in) ==
        doctest::Approx(3.0 / 14.0).epsilon(1e-14));
  CHECK(sym_gain_variance(0, 1, Scenario::s3, in) ==
        doctest::Approx(13.0 / 28.0).epsilon(1e-14));
  CHECK(sym_gain_variance(0, 1, Scenario::s4, in) ==
        doctest::Approx(13.0 / 28.0).epsilon(1e-14));
  CHECK(sym_gain_variance(1, 1, Scenario::s1, in) == 0.0);
  CHECK(sym_gain_variance(1, 1, Scenario::s3, in) ==
        doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("extraction order moves sources between the before and after cases") {
  TheoryInput in = uniform_pow3_input();
  in.extraction_order = {2, 0, 1};
  // Source 2 leads, source 1 trails. Pair (i=0, j=2): j extracted first.
  CHECK(dfl_gain_variance(0, 2, Scenario::s3, in) ==
        doctest::Approx(10.0 / 7.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(2, 0, Scenario::s3, in) ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  // Source 0 sits at position 1, source 1 at position 2: (1,0) is now the
  // already-extracted case and (0,1) the pending one.
  CHECK(dfl_gain_variance(1, 0, Scenario::s3, in) ==
        doctest::Approx(10.0 / 7.0).epsilon(1e-14));
  CHECK(dfl_gain_variance(0, 1, Scenario::s3, in) ==
        doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  // The symmetric algorithm has no order.
  CHECK(sym_gain_variance(0, 2, Scenario::s3, in) ==
        doctest::Approx(13.0 / 28.0).epsilon(1e-14));
}

TEST_CASE("gain variance is the quadratic form of the error covariance") {
  // V_ij must equal h_j^T R^(i) h_j for every algorithm/scenario/pair, with
  // one deliberate exception: the literal printed scenario-1 deflationary
  // table uses the unsquared coefficient on the not-yet-extracted side while
  // the printed covariance squares it everywhere.
  for (auto order : {std::vector<int>{}, std::vector<int>{1, 2, 0}}) {
    const TheoryInput in = mixed_tanh_input(order);
    Matrix h = seeded_orthogonal(3, 61);
    h(0, 2) += 0.7;
    h(1, 1) *= 1.6;
    for (const auto sc : kScenarios) {
      for (int i = 0; i < 3; ++i) {
        const Matrix r_cons = dfl_cov(i, sc, in);
        const Matrix r_sym = sym_cov(i, sc, in);
        for (int j = 0; j < 3; ++j) {
          const double quad_c = h.col(j).dot(r_cons * h.col(j));
          CHECK(quad_c == doctest::Approx(dfl_gain_variance(i, j, sc, in))
                              .epsilon(1e-12)
                              .scale(1.0));
          const double quad_s = h.col(j).dot(r_sym * h.col(j));
          CHECK(quad_s == doctest::Approx(sym_gain_variance(i, j, sc, in))
                              .epsilon(1e-12)
                              .scale(1.0));
        }
      }
    }
  }

  // The exception, on the uniform benchmark where both readings are known.
  const TheoryInput u = uniform_pow3_input();
  const Matrix r_printed = dfl_cov(0, Scenario::s1, u, DflVariant::printed);
  const Vector e1 = Matrix::Identity(3, 3).col(1);
  const double quad = e1.dot(r_printed * e1);
  CHECK(quad == doctest::Approx(2025.0 / 196.0).epsilon(1e-12));
  CHECK(dfl_gain_variance(0, 1, Scenario::s1, u, DflVariant::printed) ==
        doctest::Approx(75.0 / 28.0).epsilon(1e-12));
  CHECK(quad != dfl_gain_variance(0, 1, Scenario::s1, u, DflVariant::printed));
}

TEST_CASE("centering penalties match the scenario differences") {
  for (auto order : {std::vector<int>{}, std::vector<int>{2, 1, 0},
                     std::vector<int>{1, 0, 2}}) {
    const TheoryInput in = mixed_tanh_input(order);
    for (auto alg : {Algorithm::dfl, Algorithm::sym}) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const CenteringPenalty p = centering_penalty(i, j, alg, in);
          double v1, v2, v3, v4;
          if (alg == Algorithm::dfl) {
            v1 = dfl_gain_variance(i, j, Scenario::s1, in);
            v2 = dfl_gain_variance(i, j, Scenario::s2, in);
            v3 = dfl_gain_variance(i, j, Scenario::s3, in);
            v4 = dfl_gain_variance(i, j, Scenario::s4, in);
          } else {
            v1 = sym_gain_variance(i, j, Scenario::s1, in);
            v2 = sym_gain_variance(i, j, Scenario::s2, in);
            v3 = sym_gain_variance(i, j, Scenario::s3, in);
            v4 = sym_gain_variance(i, j, Scenario::s4, in);
          }
          CHECK(p.delta12 == doctest::Approx(v1 - v2).epsilon(1e-12).scale(1.0));
          CHECK(p.delta34 == doctest::Approx(v3 - v4).epsilon(1e-12).scale(1.0));
          if (i == j) {
            CHECK(p.delta12 == 0.0);
            CHECK(p.delta34 == 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("odd contrasts on symmetric sources erase the centering cost") {
  MixingModel model{Matrix::Identity(3, 3), {uniform(1.0), laplace(1.0), uniform(2.0)}};
  for (const char* name : {"pow3", "tanh", "gauss"}) {
    const TheoryInput in = make_theory_input(model, builtin_nonlinearity(name));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        CHECK(dfl_gain_variance(i, j, Scenario::s1, in) ==
              doctest::Approx(dfl_gain_variance(i, j, Scenario::s2, in))
                  .epsilon(1e-15)
                  .scale(1.0));
        CHECK(sym_gain_variance(i, j, Scenario::s3, in) ==
              doctest::Approx(sym_gain_variance(i, j, Scenario::s4, in))
                  .epsilon(1e-15)
                  .scale(1.0));
      }
  }
}

TEST_CASE("error covariances are symmetric and positive semidefinite") {
  const TheoryInput in = mixed_tanh_input({2, 0, 1});
  for (const auto sc : kScenarios) {
    for (int i = 0; i < 3; ++i) {
      for (const Matrix& r : {dfl_cov(i, sc, in), sym_cov(i, sc, in)}) {
        CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> es(r);
        CHECK(es.eigenvalues().minCoeff() >=
              -1e-10 * std::max(1.0, es.eigenvalues().maxCoeff()));
      }
    }
  }
}

TEST_CASE("variance tables carry both readings and the order actually used") {
  const TheoryInput in = uniform_pow3_input();
  const VarianceTable t = variance_table(Algorithm::dfl, Scenario::s1, in);
  CHECK(t.extraction_order == std::vector<int>{0, 1, 2});
  REQUIRE(t.tau.size() == 3);
  CHECK(t.tau[0] == doctest::Approx(0.2).epsilon(1e-14));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(t.v(i, j) == dfl_gain_variance(i, j, Scenario::s1, in));
      CHECK(t.v_printed(i, j) ==
            dfl_gain_variance(i, j, Scenario::s1, in, DflVariant::printed));
      const bool j_before_i = j < i;  // identity order
      if (j_before_i)
        CHECK(t.v_printed(i, j) > t.v(i, j));
      else
        CHECK(t.v_printed(i, j) == t.v(i, j));
    }

  const VarianceTable s3 = variance_table(Algorithm::dfl, Scenario::s3, in);
  CHECK((s3.v - s3.v_printed).cwiseAbs().maxCoeff() == 0.0);
  const VarianceTable sym3 = variance_table(Algorithm::sym, Scenario::s3, in);
  CHECK((sym3.v - sym3.v_printed).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sym3.v(0, 1) == doctest::Approx(13.0 / 28.0).epsilon(1e-14));
}

}  // TEST_SUITE
