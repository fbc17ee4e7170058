// AVX2+FMA kernel variants. This is the only translation unit built with
// -mavx2 -mfma; the dispatcher guards it behind a runtime CPU check.

#include <immintrin.h>

#include <cassert>
#include <cmath>
#include <cstdint>

#include "fica/kernels.hpp"

namespace fica::kernels::avx2 {

namespace {

constexpr int kMaxChannels = 64;

inline double hsum(__m256d v) {
  // Fixed reduction order: (l0+l2) + (l1+l3).
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(s) + _mm_cvtsd_f64(_mm_unpackhi_pd(s, s));
}

// exp(x) after Cephes: n = round(x log2 e), r = x - n ln 2 (split constant),
// rational approximation on r, scale by 2^n. Inputs are clamped to
// [-690, 709] so the 2^n scaling stays in the normal range; everything this
// file feeds it is far inside that.
inline __m256d exp_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  x = _mm256_min_pd(x, _mm256_set1_pd(709.0));
  x = _mm256_max_pd(x, _mm256_set1_pd(-690.0));

  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  __m256d nf = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                               _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);

  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  __m256d r = _mm256_fnmadd_pd(nf, ln2_hi, x);
  r = _mm256_fnmadd_pd(nf, ln2_lo, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000005e0));

  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, one);

  const __m128i n32 = _mm256_cvtpd_epi32(nf);
  const __m256i n64 = _mm256_cvtepi32_epi64(n32);
  const __m256i pow2 =
      _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(pow2));
}

inline __m256d tanh_pd(__m256d u) {
  const __m256d abs_mask =
      _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffll));
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d au = _mm256_and_pd(u, abs_mask);
  // tanh(22) rounds to 1.0, so larger arguments can be capped before exp.
  au = _mm256_min_pd(au, _mm256_set1_pd(22.0));
  const __m256d e = exp_pd(_mm256_add_pd(au, au));
  const __m256d t = _mm256_div_pd(_mm256_sub_pd(e, one), _mm256_add_pd(e, one));
  const __m256d sign = _mm256_andnot_pd(abs_mask, u);
  return _mm256_or_pd(t, sign);
}

inline void eval_contrast_pd(Contrast c, __m256d u, __m256d& g, __m256d& gp) {
  const __m256d one = _mm256_set1_pd(1.0);
  switch (c) {
    case Contrast::pow3: {
      const __m256d u2 = _mm256_mul_pd(u, u);
      g = _mm256_mul_pd(u2, u);
      gp = _mm256_mul_pd(_mm256_set1_pd(3.0), u2);
      return;
    }
    case Contrast::tanh: {
      const __m256d t = tanh_pd(u);
      g = t;
      gp = _mm256_fnmadd_pd(t, t, one);
      return;
    }
    case Contrast::gauss: {
      const __m256d u2 = _mm256_mul_pd(u, u);
      const __m256d e = exp_pd(_mm256_mul_pd(_mm256_set1_pd(-0.5), u2));
      g = _mm256_mul_pd(u, e);
      gp = _mm256_mul_pd(_mm256_sub_pd(one, u2), e);
      return;
    }
  }
  g = gp = _mm256_setzero_pd();  // unreachable
}

inline void eval_contrast_1(Contrast c, double u, double& g, double& gp) {
  switch (c) {
    case Contrast::pow3: {
      const double u2 = u * u;
      g = u2 * u;
      gp = 3.0 * u2;
      return;
    }
    case Contrast::tanh: {
      const double t = std::tanh(u);
      g = t;
      gp = 1.0 - t * t;
      return;
    }
    case Contrast::gauss: {
      const double e = std::exp(-0.5 * u * u);
      g = u * e;
      gp = (1.0 - u * u) * e;
      return;
    }
  }
  g = gp = 0.0;
}

}  // namespace

void row_means(const double* x, int d, std::int64_t n, double* out_mean) {
  for (int k = 0; k < d; ++k) {
    const double* row = x + static_cast<std::int64_t>(k) * n;
    __m256d acc = _mm256_setzero_pd();
    std::int64_t t = 0;
    for (; t + 4 <= n; t += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(row + t));
    double s = hsum(acc);
    for (; t < n; ++t) s += row[t];
    out_mean[k] = s / static_cast<double>(n);
  }
}

void scatter(const double* x, int d, std::int64_t n, const double* center, double* out) {
  for (int k = 0; k < d; ++k) {
    const double* rk = x + static_cast<std::int64_t>(k) * n;
    const __m256d ck = _mm256_set1_pd(center[k]);
    for (int m = k; m < d; ++m) {
      const double* rm = x + static_cast<std::int64_t>(m) * n;
      const __m256d cm = _mm256_set1_pd(center[m]);
      __m256d acc = _mm256_setzero_pd();
      std::int64_t t = 0;
      for (; t + 4 <= n; t += 4) {
        const __m256d vk = _mm256_sub_pd(_mm256_loadu_pd(rk + t), ck);
        const __m256d vm = _mm256_sub_pd(_mm256_loadu_pd(rm + t), cm);
        acc = _mm256_fmadd_pd(vk, vm, acc);
      }
      double s = hsum(acc);
      for (; t < n; ++t) s += (rk[t] - center[k]) * (rm[t] - center[m]);
      out[k * d + m] = s;
      out[m * d + k] = s;
    }
  }
}

void contrast_pass(Contrast c, const double* x, int d, std::int64_t n, const double* w,
                   double* out_g_prime_sum, double* out_gx_sum) {
  // The dispatcher routes d > kMaxChannels to the scalar reference path.
  assert(d <= kMaxChannels);
  __m256d gp_acc = _mm256_setzero_pd();
  __m256d gx_acc[kMaxChannels];
  for (int k = 0; k < d; ++k) gx_acc[k] = _mm256_setzero_pd();

  std::int64_t t = 0;
  for (; t + 4 <= n; t += 4) {
    __m256d u = _mm256_mul_pd(_mm256_set1_pd(w[0]), _mm256_loadu_pd(x + t));
    for (int k = 1; k < d; ++k)
      u = _mm256_fmadd_pd(_mm256_set1_pd(w[k]),
                          _mm256_loadu_pd(x + static_cast<std::int64_t>(k) * n + t), u);
    __m256d g, gp;
    eval_contrast_pd(c, u, g, gp);
    gp_acc = _mm256_add_pd(gp_acc, gp);
    for (int k = 0; k < d; ++k)
      gx_acc[k] = _mm256_fmadd_pd(
          g, _mm256_loadu_pd(x + static_cast<std::int64_t>(k) * n + t), gx_acc[k]);
  }

  double gp_sum = hsum(gp_acc);
  for (int k = 0; k < d; ++k) out_gx_sum[k] = hsum(gx_acc[k]);

  for (; t < n; ++t) {
    double u = 0.0;
    for (int k = 0; k < d; ++k) u += w[k] * x[static_cast<std::int64_t>(k) * n + t];
    double g, gp;
    eval_contrast_1(c, u, g, gp);
    gp_sum += gp;
    for (int k = 0; k < d; ++k)
      out_gx_sum[k] += g * x[static_cast<std::int64_t>(k) * n + t];
  }
  *out_g_prime_sum = gp_sum;
}

}  // namespace fica::kernels::avx2
