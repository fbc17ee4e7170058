#pragma once

#include <cstdint>
#include <string_view>

// Data-parallel inner loops shared by the estimation pipeline: per-channel
// means, scatter accumulation, and the contrast expectation pass of the
// fixed-point update. Each kernel has a scalar reference implementation and
// an AVX2 variant; the dispatcher picks one at runtime and tests assert their
// equivalence. Selection is stable for the lifetime of a process run, so
// results stay bit-identical across reruns on the same machine.
//
// Layout convention: a sample block is row-major d x n, channel k occupying
// the contiguous range [x + k*n, x + (k+1)*n). d is small, n is large.

namespace fica::kernels {

enum class Isa { scalar, avx2 };

enum class Contrast { pow3, tanh, gauss };

bool cpu_has_avx2() noexcept;

// Currently selected ISA (defaults to the best the CPU supports).
Isa active() noexcept;

// "auto" | "scalar" | "avx2". Returns false and leaves the selection
// unchanged if the name is unknown or the ISA is not available here.
bool select(std::string_view name) noexcept;

std::string_view name(Isa) noexcept;

// out_mean[k] = (1/n) * sum_t x[k][t]
void row_means(Isa isa, const double* x, int d, std::int64_t n, double* out_mean);

// out[k*d + m] = sum_t (x[k][t] - center[k]) * (x[m][t] - center[m]);
// the caller applies the 1/n normalization. out is symmetric.
void scatter(Isa isa, const double* x, int d, std::int64_t n, const double* center,
             double* out);

// One pass of the contrast expectation: with u_t = sum_k w[k] * x[k][t],
//   *out_g_prime_sum = sum_t g'(u_t)
//   out_gx_sum[k]    = sum_t g(u_t) * x[k][t]
// The vector variants cover d <= 64; wider blocks take the scalar reference
// path whatever the selection, with bit-identical results to Isa::scalar.
void contrast_pass(Isa isa, Contrast c, const double* x, int d, std::int64_t n,
                   const double* w, double* out_g_prime_sum, double* out_gx_sum);

// Dispatching overloads on the active ISA.
inline void row_means(const double* x, int d, std::int64_t n, double* out_mean) {
  row_means(active(), x, d, n, out_mean);
}
inline void scatter(const double* x, int d, std::int64_t n, const double* center,
                    double* out) {
  scatter(active(), x, d, n, center, out);
}
inline void contrast_pass(Contrast c, const double* x, int d, std::int64_t n,
                          const double* w, double* out_g_prime_sum, double* out_gx_sum) {
  contrast_pass(active(), c, x, d, n, w, out_g_prime_sum, out_gx_sum);
}

}  // namespace fica::kernels
