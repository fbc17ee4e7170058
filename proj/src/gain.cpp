#include "fica/gain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fica/errors.hpp"

namespace fica {

Matrix gain_matrix(const Matrix& w, const Matrix& sphering, const Matrix& h) {
  const auto d = h.rows();
  if (w.rows() != d || w.cols() != d || sphering.rows() != d || sphering.cols() != d ||
      h.cols() != d)
    throw ValidationError("gain_matrix: dimension mismatch");
  return w.transpose() * sphering * h;
}

std::vector<int> max_assignment(const Matrix& scores) {
  const int n = static_cast<int>(scores.rows());
  if (n == 0 || scores.cols() != n) throw ValidationError("max_assignment: square matrix required");
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Hungarian method with potentials, on cost = -scores, 1-indexed frame.
  // p[j] = row currently assigned to column j (0 = none).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](int i, int j) { return -scores(i - 1, j - 1); };

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), char{0});
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> pi(n, -1);
  for (int j = 1; j <= n; ++j) pi[p[j] - 1] = j - 1;
  return pi;
}

GainSample align(const Matrix& g, double tie_tol) {
  const int d = static_cast<int>(g.rows());
  if (d == 0 || g.cols() != d) throw ValidationError("align: square matrix required");

  GainSample out;
  out.g_raw = g;
  const Matrix scores = g.cwiseAbs();
  out.permutation = max_assignment(scores);

  if (d <= 7) {
    // Exhaustive check that no second assignment ties the optimum; the
    // Hungarian result itself is trusted, this only guards the margin.
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    double second = best;
    do {
      double obj = 0.0;
      for (int i = 0; i < d; ++i) obj += scores(i, perm[i]);
      if (obj > best) {
        second = best;
        best = obj;
      } else if (obj > second) {
        second = obj;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (d > 1 && best - second < tie_tol) out.ambiguous = true;
  }

  out.g_aligned.resize(d, d);
  for (int p = 0; p < d; ++p) out.g_aligned.row(out.permutation[p]) = g.row(p);
  out.signs.assign(d, 1.0);
  for (int i = 0; i < d; ++i) {
    if (out.g_aligned(i, i) < 0.0) {
      out.signs[i] = -1.0;
      out.g_aligned.row(i) = -out.g_aligned.row(i);
    }
  }
  return out;
}

}  // namespace fica
