#include "fica/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cmath>

#include "fica/errors.hpp"

namespace fica::kernels {

namespace {

// ------------------------------------------------------------------- scalar

void row_means_scalar(const double* x, int d, std::int64_t n, double* out_mean) {
  for (int k = 0; k < d; ++k) {
    const double* row = x + static_cast<std::int64_t>(k) * n;
    double acc = 0.0;
    for (std::int64_t t = 0; t < n; ++t) acc += row[t];
    out_mean[k] = acc / static_cast<double>(n);
  }
}

void scatter_scalar(const double* x, int d, std::int64_t n, const double* center,
                    double* out) {
  for (int k = 0; k < d; ++k) {
    const double* rk = x + static_cast<std::int64_t>(k) * n;
    for (int m = k; m < d; ++m) {
      const double* rm = x + static_cast<std::int64_t>(m) * n;
      double acc = 0.0;
      for (std::int64_t t = 0; t < n; ++t)
        acc += (rk[t] - center[k]) * (rm[t] - center[m]);
      out[k * d + m] = acc;
      out[m * d + k] = acc;
    }
  }
}

inline void eval_contrast(Contrast c, double u, double& g, double& gp) {
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
  g = gp = 0.0;  // unreachable
}

void contrast_scalar(Contrast c, const double* x, int d, std::int64_t n, const double* w,
                     double* out_g_prime_sum, double* out_gx_sum) {
  double gp_acc = 0.0;
  for (int k = 0; k < d; ++k) out_gx_sum[k] = 0.0;
  for (std::int64_t t = 0; t < n; ++t) {
    double u = 0.0;
    for (int k = 0; k < d; ++k) u += w[k] * x[static_cast<std::int64_t>(k) * n + t];
    double g, gp;
    eval_contrast(c, u, g, gp);
    gp_acc += gp;
    for (int k = 0; k < d; ++k) out_gx_sum[k] += g * x[static_cast<std::int64_t>(k) * n + t];
  }
  *out_g_prime_sum = gp_acc;
}

// ----------------------------------------------------------------- dispatch

Isa default_isa() noexcept {
#if defined(FICA_BUILD_AVX2)
  if (cpu_has_avx2()) return Isa::avx2;
#endif
  return Isa::scalar;
}

std::atomic<Isa>& active_slot() noexcept {
  static std::atomic<Isa> slot{default_isa()};
  return slot;
}

}  // namespace

#if defined(FICA_BUILD_AVX2)
// Defined in kernels_avx2.cpp, compiled with vector flags.
namespace avx2 {
void row_means(const double* x, int d, std::int64_t n, double* out_mean);
void scatter(const double* x, int d, std::int64_t n, const double* center, double* out);
void contrast_pass(Contrast c, const double* x, int d, std::int64_t n, const double* w,
                   double* out_g_prime_sum, double* out_gx_sum);
}  // namespace avx2
#endif

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active() noexcept { return active_slot().load(std::memory_order_relaxed); }

bool select(std::string_view requested) noexcept {
  if (requested == "auto") {
    active_slot().store(default_isa(), std::memory_order_relaxed);
    return true;
  }
  if (requested == "scalar") {
    active_slot().store(Isa::scalar, std::memory_order_relaxed);
    return true;
  }
  if (requested == "avx2") {
#if defined(FICA_BUILD_AVX2)
    if (cpu_has_avx2()) {
      active_slot().store(Isa::avx2, std::memory_order_relaxed);
      return true;
    }
#endif
    return false;
  }
  return false;
}

std::string_view name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

void row_means(Isa isa, const double* x, int d, std::int64_t n, double* out_mean) {
  assert(d >= 1 && n >= 1);
#if defined(FICA_BUILD_AVX2)
  if (isa == Isa::avx2) {
    avx2::row_means(x, d, n, out_mean);
    return;
  }
#endif
  if (isa != Isa::scalar) throw ValidationError("kernel ISA not available in this build");
  row_means_scalar(x, d, n, out_mean);
}

void scatter(Isa isa, const double* x, int d, std::int64_t n, const double* center,
             double* out) {
  assert(d >= 1 && n >= 1);
#if defined(FICA_BUILD_AVX2)
  if (isa == Isa::avx2) {
    avx2::scatter(x, d, n, center, out);
    return;
  }
#endif
  if (isa != Isa::scalar) throw ValidationError("kernel ISA not available in this build");
  scatter_scalar(x, d, n, center, out);
}

void contrast_pass(Isa isa, Contrast c, const double* x, int d, std::int64_t n,
                   const double* w, double* out_g_prime_sum, double* out_gx_sum) {
  assert(d >= 1 && n >= 1);
  // The vector variant keeps one accumulator register per channel; past that
  // budget every ISA takes the scalar reference path, so results match the
  // scalar selection bit for bit.
  constexpr int kMaxVectorChannels = 64;
#if defined(FICA_BUILD_AVX2)
  if (isa == Isa::avx2) {
    if (d <= kMaxVectorChannels) {
      avx2::contrast_pass(c, x, d, n, w, out_g_prime_sum, out_gx_sum);
    } else {
      contrast_scalar(c, x, d, n, w, out_g_prime_sum, out_gx_sum);
    }
    return;
  }
#endif
  if (isa != Isa::scalar) throw ValidationError("kernel ISA not available in this build");
  contrast_scalar(c, x, d, n, w, out_g_prime_sum, out_gx_sum);
}

}  // namespace fica::kernels
