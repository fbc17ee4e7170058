#pragma once

#include <vector>

#include "fica/fastica.hpp"
#include "fica/linalg.hpp"
#include "fica/nonlinearity.hpp"
#include "fica/preprocess.hpp"
#include "fica/sources.hpp"

namespace fica {

// Inputs to the closed-form asymptotic error formulas. Indices are 0-based
// source indices throughout; entry (i,j) of a gain-variance table refers to
// the component estimating source i versus source j.
struct TheoryInput {
  std::vector<MomentSet> moments;  // per source, aligned with B's columns
  Matrix b;                        // demixing target B = (H^{-1})^T
  // Deflationary only: extraction_order[p] = source extracted at position p.
  // Empty means identity. The formulas sum over sources extracted before or
  // after the one of interest, so deflationary predictions depend on this.
  std::vector<int> extraction_order;
};

TheoryInput make_theory_input(const MixingModel& model, const Nonlinearity& nl,
                              const MomentOptions& opt = {});

// The printed scenario-1 deflationary coefficients are beta^2/alpha^2, while
// the j>i corollary case and the centering-difference identities imply
// beta/alpha^2; the source text is internally inconsistent. Both readings are
// computed: `consistent` (default everywhere) satisfies the difference
// identities, `printed` is the literal text. They differ only for the
// deflationary algorithm under scenario 1; a Monte Carlo adjudication run
// records which one the data supports.
enum class DflVariant { consistent, printed };

// Asymptotic covariance of sqrt(N) * (C^{-1/2} w_i - b_i), the estimation
// error of source i's demixing vector.
Matrix dfl_cov(int i, Scenario k, const TheoryInput& in,
               DflVariant v = DflVariant::consistent);
Matrix sym_cov(int i, Scenario k, const TheoryInput& in);

// Asymptotic variance of sqrt(N) * (G_ij - delta_ij).
double dfl_gain_variance(int i, int j, Scenario k, const TheoryInput& in,
                         DflVariant v = DflVariant::consistent);
double sym_gain_variance(int i, int j, Scenario k, const TheoryInput& in);

// Discussion-section centering penalties: delta12 = V(1)-V(2) and
// delta34 = V(3)-V(4) in closed form (eta_j^2/alpha_j^2 flavors). The same
// values must come out of subtracting the corresponding gain variances.
struct CenteringPenalty {
  double delta12 = 0;
  double delta34 = 0;
};
CenteringPenalty centering_penalty(int i, int j, Algorithm alg, const TheoryInput& in);

struct VarianceTable {
  Algorithm algorithm = Algorithm::sym;
  Scenario scenario = Scenario::s1;
  Matrix v;          // identity-consistent values (the defaults)
  Matrix v_printed;  // literal printed values; equals v except dfl scenario 1
  std::vector<double> tau;          // per source, for diagonal bound checks
  std::vector<int> extraction_order;  // as used (explicit identity if empty)
};

VarianceTable variance_table(Algorithm alg, Scenario k, const TheoryInput& in);

}  // namespace fica
