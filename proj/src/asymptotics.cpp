// Closed-form asymptotic error covariances and gain variances for both
// algorithms under the four standardization pipelines. Everything is a
// polynomial in the per-source expectations (alpha..skew) and rank-one
// products of the demixing target's columns.

#include "fica/asymptotics.hpp"

#include <cmath>
#include <vector>

#include "fica/errors.hpp"

namespace fica {

namespace {

int dim_of(const TheoryInput& in) {
  const int d = static_cast<int>(in.b.rows());
  if (d == 0 || in.b.cols() != d) throw ValidationError("theory input: B must be square");
  if (static_cast<int>(in.moments.size()) != d)
    throw ValidationError("theory input: one moment set per source required");
  return d;
}

void check_separable(const TheoryInput& in) {
  for (const auto& m : in.moments)
    if (!m.separable)
      throw NumericalError(
          "theory input: a source has vanishing alpha for this nonlinearity; "
          "the asymptotic variances are undefined");
}

// pos[s] = extraction position of source s; identity when the order is empty.
std::vector<int> positions(const TheoryInput& in, int d) {
  std::vector<int> pos(d);
  if (in.extraction_order.empty()) {
    for (int s = 0; s < d; ++s) pos[s] = s;
    return pos;
  }
  if (static_cast<int>(in.extraction_order.size()) != d)
    throw ValidationError("extraction_order must have one entry per source");
  std::vector<char> seen(d, 0);
  for (int p = 0; p < d; ++p) {
    const int s = in.extraction_order[p];
    if (s < 0 || s >= d || seen[s])
      throw ValidationError("extraction_order must be a permutation of the sources");
    seen[s] = 1;
    pos[s] = p;
  }
  return pos;
}

void check_index(int i, int d, const char* what) {
  if (i < 0 || i >= d) throw ValidationError(std::string(what) + ": source index out of range");
}

double sq(double x) { return x * x; }

}  // namespace

TheoryInput make_theory_input(const MixingModel& model, const Nonlinearity& nl,
                              const MomentOptions& opt) {
  TheoryInput in;
  in.b = model.demix_target();
  in.moments.reserve(model.sources.size());
  for (const auto& s : model.sources) in.moments.push_back(compute_moments(s, nl, opt));
  return in;
}

Matrix dfl_cov(int i, Scenario k, const TheoryInput& in, DflVariant v) {
  const int d = dim_of(in);
  check_index(i, d, "dfl_cov");
  check_separable(in);
  const auto pos = positions(in, d);
  const auto& mo = in.moments;
  const auto& mi = mo[i];

  Matrix r = Matrix::Zero(d, d);
  const Vector bi = in.b.col(i);

  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    const auto& mj = mo[j];
    const Vector bj = in.b.col(j);
    if (pos[j] < pos[i]) {
      double coeff = 0.0;
      switch (k) {
        case Scenario::s1:
          coeff = (v == DflVariant::printed ? sq(mj.beta) : mj.beta) / sq(mj.alpha);
          break;
        case Scenario::s2:
          coeff = (mj.beta - sq(mj.eta)) / sq(mj.alpha);
          break;
        case Scenario::s3:
          coeff = (mj.beta - sq(mj.gamma) + sq(mj.alpha)) / sq(mj.alpha);
          break;
        case Scenario::s4:
          coeff = (mj.beta - sq(mj.gamma) + sq(mj.alpha) - sq(mj.eta)) / sq(mj.alpha);
          break;
      }
      r += coeff * bj * bj.transpose();
      if (k == Scenario::s3 || k == Scenario::s4) {
        const double c = mi.skew * mj.eta / mj.alpha;
        r -= c * (bj * bi.transpose() + bi * bj.transpose());
      }
    } else {
      double coeff = 0.0;
      switch (k) {
        case Scenario::s1:
          coeff = (v == DflVariant::printed ? sq(mi.beta) : mi.beta) / sq(mi.alpha);
          break;
        case Scenario::s2:
          coeff = (mi.beta - sq(mi.eta)) / sq(mi.alpha);
          break;
        case Scenario::s3:
          coeff = (mi.beta - sq(mi.gamma)) / sq(mi.alpha);
          break;
        case Scenario::s4:
          coeff = (mi.beta - sq(mi.gamma) - sq(mi.eta)) / sq(mi.alpha);
          break;
      }
      r += coeff * bj * bj.transpose();
    }
  }

  // Cross products over pairs of previously extracted sources appear only in
  // the scenarios that keep the theoretical centering.
  if (k == Scenario::s1 || k == Scenario::s3) {
    Vector u = Vector::Zero(d);
    for (int j = 0; j < d; ++j)
      if (j != i && pos[j] < pos[i]) u += (mo[j].eta / mo[j].alpha) * in.b.col(j);
    Matrix outer = u * u.transpose();
    for (int j = 0; j < d; ++j)
      if (j != i && pos[j] < pos[i])
        outer -= sq(mo[j].eta / mo[j].alpha) * in.b.col(j) * in.b.col(j).transpose();
    r += outer;
  }

  if (k == Scenario::s3 || k == Scenario::s4) r += mi.tau * bi * bi.transpose();
  return r;
}

Matrix sym_cov(int i, Scenario k, const TheoryInput& in) {
  const int d = dim_of(in);
  check_index(i, d, "sym_cov");
  check_separable(in);
  const auto& mo = in.moments;
  const auto& mi = mo[i];
  const double ai = std::abs(mi.alpha);

  Matrix r = Matrix::Zero(d, d);
  const Vector bi = in.b.col(i);

  for (int j = 0; j < d; ++j) {
    if (j == i) continue;
    const auto& mj = mo[j];
    const Vector bj = in.b.col(j);
    const double den = sq(ai + std::abs(mj.alpha));
    double coeff = 0.0;
    switch (k) {
      case Scenario::s1:
        coeff = (mi.beta + mj.beta - 2.0 * mi.gamma * mj.gamma - 2.0 * sq(mj.eta)) / den;
        break;
      case Scenario::s2:
        coeff = (mi.beta + mj.beta - 2.0 * mi.gamma * mj.gamma - 2.0 * sq(mi.eta)) / den;
        break;
      case Scenario::s3:
        coeff = (mi.beta - sq(mi.gamma) + mj.beta - sq(mj.gamma) + sq(mj.alpha) -
                 sq(mj.eta)) /
                den;
        break;
      case Scenario::s4:
        coeff = (mi.beta - sq(mi.gamma) + mj.beta - sq(mj.gamma) + sq(mj.alpha) -
                 sq(mi.eta) - sq(mj.eta)) /
                den;
        break;
    }
    r += coeff * bj * bj.transpose();
    if (k == Scenario::s3) {
      const double c = mi.skew * mj.eta / (2.0 * (ai + std::abs(mj.alpha)));
      r -= c * (bj * bi.transpose() + bi * bj.transpose());
    }
  }

  if (k == Scenario::s1 || k == Scenario::s3) {
    Vector u = Vector::Zero(d);
    for (int j = 0; j < d; ++j)
      if (j != i) u += (mo[j].eta / (ai + std::abs(mo[j].alpha))) * in.b.col(j);
    r += (k == Scenario::s1 ? 2.0 : 1.0) * u * u.transpose();
  }

  if (k == Scenario::s3 || k == Scenario::s4) r += mi.tau * bi * bi.transpose();
  return r;
}

double dfl_gain_variance(int i, int j, Scenario k, const TheoryInput& in, DflVariant v) {
  const int d = dim_of(in);
  check_index(i, d, "dfl_gain_variance");
  check_index(j, d, "dfl_gain_variance");
  check_separable(in);
  const auto pos = positions(in, d);
  const auto& mo = in.moments;

  if (i == j)
    return (k == Scenario::s3 || k == Scenario::s4) ? mo[i].tau : 0.0;

  if (pos[j] < pos[i]) {
    const auto& m = mo[j];
    switch (k) {
      case Scenario::s1:
        return (v == DflVariant::printed ? sq(m.beta) : m.beta) / sq(m.alpha);
      case Scenario::s2:
        return (m.beta - sq(m.eta)) / sq(m.alpha);
      case Scenario::s3:
        return (m.beta - sq(m.gamma) + sq(m.alpha)) / sq(m.alpha);
      case Scenario::s4:
        return (m.beta - sq(m.gamma) + sq(m.alpha) - sq(m.eta)) / sq(m.alpha);
    }
  } else {
    const auto& m = mo[i];
    switch (k) {
      case Scenario::s1:
        return m.beta / sq(m.alpha);
      case Scenario::s2:
        return (m.beta - sq(m.eta)) / sq(m.alpha);
      case Scenario::s3:
        return (m.beta - sq(m.gamma)) / sq(m.alpha);
      case Scenario::s4:
        return (m.beta - sq(m.gamma) - sq(m.eta)) / sq(m.alpha);
    }
  }
  throw ValidationError("dfl_gain_variance: unknown scenario");
}

double sym_gain_variance(int i, int j, Scenario k, const TheoryInput& in) {
  const int d = dim_of(in);
  check_index(i, d, "sym_gain_variance");
  check_index(j, d, "sym_gain_variance");
  check_separable(in);
  const auto& mo = in.moments;

  if (i == j)
    return (k == Scenario::s3 || k == Scenario::s4) ? mo[i].tau : 0.0;

  const auto& mi = mo[i];
  const auto& mj = mo[j];
  const double den = sq(std::abs(mi.alpha) + std::abs(mj.alpha));
  switch (k) {
    case Scenario::s1:
      return (mi.beta + mj.beta - 2.0 * mi.gamma * mj.gamma) / den;
    case Scenario::s2:
      return (mi.beta + mj.beta - 2.0 * mi.gamma * mj.gamma - 2.0 * sq(mi.eta)) / den;
    case Scenario::s3:
      return (mi.beta - sq(mi.gamma) + mj.beta - sq(mj.gamma) + sq(mj.alpha)) / den;
    case Scenario::s4:
      return (mi.beta - sq(mi.gamma) + mj.beta - sq(mj.gamma) + sq(mj.alpha) -
              sq(mi.eta) - sq(mj.eta)) /
             den;
  }
  throw ValidationError("sym_gain_variance: unknown scenario");
}

CenteringPenalty centering_penalty(int i, int j, Algorithm alg, const TheoryInput& in) {
  const int d = dim_of(in);
  check_index(i, d, "centering_penalty");
  check_index(j, d, "centering_penalty");
  check_separable(in);
  const auto& mo = in.moments;

  CenteringPenalty p;
  if (i == j) return p;

  if (alg == Algorithm::dfl) {
    const auto pos = positions(in, d);
    const auto& m = pos[j] < pos[i] ? mo[j] : mo[i];
    p.delta12 = sq(m.eta) / sq(m.alpha);
    p.delta34 = p.delta12;
  } else {
    const double den = sq(std::abs(mo[i].alpha) + std::abs(mo[j].alpha));
    p.delta12 = 2.0 * sq(mo[i].eta) / den;
    p.delta34 = (sq(mo[i].eta) + sq(mo[j].eta)) / den;
  }
  return p;
}

VarianceTable variance_table(Algorithm alg, Scenario k, const TheoryInput& in) {
  const int d = dim_of(in);

  VarianceTable t;
  t.algorithm = alg;
  t.scenario = k;
  t.v.resize(d, d);
  t.v_printed.resize(d, d);
  t.tau.reserve(d);
  for (const auto& m : in.moments) t.tau.push_back(m.tau);
  if (in.extraction_order.empty()) {
    for (int p = 0; p < d; ++p) t.extraction_order.push_back(p);
  } else {
    t.extraction_order = in.extraction_order;
  }

  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (alg == Algorithm::dfl) {
        t.v(i, j) = dfl_gain_variance(i, j, k, in, DflVariant::consistent);
        t.v_printed(i, j) = dfl_gain_variance(i, j, k, in, DflVariant::printed);
      } else {
        t.v(i, j) = sym_gain_variance(i, j, k, in);
        t.v_printed(i, j) = t.v(i, j);
      }
    }
  }
  return t;
}

}  // namespace fica
