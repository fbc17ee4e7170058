#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "fica/kernels.hpp"
#include "fica/rng.hpp"

using namespace fica;
using kernels::Contrast;
using kernels::Isa;

namespace {

// Row-major d x n block of standard normals.
std::vector<double> random_block(int d, std::int64_t n, std::uint64_t seed) {
  std::vector<double> x(static_cast<std::size_t>(d) * n);
  rng::Engine g(seed);
  rng::Normal normal;
  for (auto& v : x) v = normal(g);
  return x;
}

double g_of(Contrast c, double u) {
  switch (c) {
    case Contrast::pow3: return u * u * u;
    case Contrast::tanh: return std::tanh(u);
    case Contrast::gauss: return u * std::exp(-0.5 * u * u);
  }
  return 0;
}

double gp_of(Contrast c, double u) {
  switch (c) {
    case Contrast::pow3: return 3.0 * u * u;
    case Contrast::tanh: { const double t = std::tanh(u); return 1.0 - t * t; }
    case Contrast::gauss: return (1.0 - u * u) * std::exp(-0.5 * u * u);
  }
  return 0;
}

// Reference pass in plain double loops, same accumulation order as the
// scalar kernel.
void naive_contrast(Contrast c, const double* x, int d, std::int64_t n, const double* w,
                    double* gp_sum, double* gx_sum) {
  *gp_sum = 0;
  for (int k = 0; k < d; ++k) gx_sum[k] = 0;
  for (std::int64_t t = 0; t < n; ++t) {
    double u = 0;
    for (int k = 0; k < d; ++k) u += w[k] * x[k * n + t];
    *gp_sum += gp_of(c, u);
    const double gu = g_of(c, u);
    for (int k = 0; k < d; ++k) gx_sum[k] += gu * x[k * n + t];
  }
}

bool close(double a, double b, double rtol, double atol) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

struct IsaRestore {
  ~IsaRestore() { kernels::select("auto"); }
};

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("isa selection is explicit and sticky") {
  IsaRestore restore;
  REQUIRE(kernels::select("scalar"));
  CHECK(kernels::active() == Isa::scalar);
  CHECK(kernels::name(kernels::active()) == "scalar");
  CHECK_FALSE(kernels::select("neon"));
  CHECK(kernels::active() == Isa::scalar);  // unknown name leaves selection alone
  if (kernels::cpu_has_avx2()) {
    REQUIRE(kernels::select("avx2"));
    CHECK(kernels::active() == Isa::avx2);
  } else {
    CHECK_FALSE(kernels::select("avx2"));
  }
  REQUIRE(kernels::select("auto"));
}

TEST_CASE("row_means matches the reference on awkward sizes") {
  for (int d : {1, 3, 5}) {
    for (std::int64_t n : {1, 4, 5, 17, 1023}) {
      const auto x = random_block(d, n, rng::derive(1, d * 1000 + n));
      std::vector<double> ref(d);
      for (int k = 0; k < d; ++k) {
        double s = 0;
        for (std::int64_t t = 0; t < n; ++t) s += x[k * n + t];
        ref[k] = s / double(n);
      }
      std::vector<double> got(d);
      kernels::row_means(Isa::scalar, x.data(), d, n, got.data());
      for (int k = 0; k < d; ++k) CHECK(close(got[k], ref[k], 1e-14, 1e-15));
      if (kernels::cpu_has_avx2()) {
        kernels::row_means(Isa::avx2, x.data(), d, n, got.data());
        for (int k = 0; k < d; ++k) CHECK(close(got[k], ref[k], 1e-13, 1e-14));
      }
    }
  }
}

TEST_CASE("scatter matches the reference and is symmetric") {
  for (int d : {1, 2, 4}) {
    for (std::int64_t n : {3, 16, 257}) {
      const auto x = random_block(d, n, rng::derive(2, d * 1000 + n));
      std::vector<double> center(d, 0.25);
      std::vector<double> ref(d * d, 0.0);
      for (std::int64_t t = 0; t < n; ++t)
        for (int k = 0; k < d; ++k)
          for (int m = 0; m < d; ++m)
            ref[k * d + m] += (x[k * n + t] - center[k]) * (x[m * n + t] - center[m]);

      std::vector<double> got(d * d);
      kernels::scatter(Isa::scalar, x.data(), d, n, center.data(), got.data());
      for (int e = 0; e < d * d; ++e) CHECK(close(got[e], ref[e], 1e-12, 1e-12));
      for (int k = 0; k < d; ++k)
        for (int m = 0; m < d; ++m) CHECK(got[k * d + m] == got[m * d + k]);

      if (kernels::cpu_has_avx2()) {
        kernels::scatter(Isa::avx2, x.data(), d, n, center.data(), got.data());
        for (int e = 0; e < d * d; ++e) CHECK(close(got[e], ref[e], 1e-11, 1e-12));
      }
    }
  }
}

TEST_CASE("contrast_pass scalar equals the naive loop") {
  for (Contrast c : {Contrast::pow3, Contrast::tanh, Contrast::gauss}) {
    for (std::int64_t n : {2, 7, 64, 501}) {
      const int d = 3;
      const auto x = random_block(d, n, rng::derive(3, n));
      const double w[3] = {0.5, -0.7, 0.3};
      double gp_ref, gp_got;
      std::vector<double> gx_ref(d), gx_got(d);
      naive_contrast(c, x.data(), d, n, w, &gp_ref, gx_ref.data());
      kernels::contrast_pass(Isa::scalar, c, x.data(), d, n, w, &gp_got, gx_got.data());
      CHECK(close(gp_got, gp_ref, 1e-13, 1e-13));
      for (int k = 0; k < d; ++k) CHECK(close(gx_got[k], gx_ref[k], 1e-13, 1e-13));
    }
  }
}

TEST_CASE("contrast_pass avx2 agrees with scalar within vector-math slack") {
  if (!kernels::cpu_has_avx2()) return;
  for (Contrast c : {Contrast::pow3, Contrast::tanh, Contrast::gauss}) {
    // Remainder lengths cover every tail path of the 4-wide loop.
    for (std::int64_t n : {4, 5, 6, 7, 1000, 1001, 1002, 1003}) {
      for (int d : {1, 3, 8}) {
        const auto x = random_block(d, n, rng::derive(4, 17 * n + d));
        std::vector<double> w(d);
        for (int k = 0; k < d; ++k) w[k] = (k % 2 ? -1.0 : 1.0) / std::sqrt(double(d));
        double gp_s, gp_v;
        std::vector<double> gx_s(d), gx_v(d);
        kernels::contrast_pass(Isa::scalar, c, x.data(), d, n, w.data(), &gp_s, gx_s.data());
        kernels::contrast_pass(Isa::avx2, c, x.data(), d, n, w.data(), &gp_v, gx_v.data());
        // Compare per-sample averages so the tolerance does not scale with n.
        CHECK(close(gp_v / double(n), gp_s / double(n), 1e-11, 1e-12));
        for (int k = 0; k < d; ++k)
          CHECK(close(gx_v[k] / double(n), gx_s[k] / double(n), 1e-11, 1e-12));
      }
    }
  }
}

TEST_CASE("vector tanh and gauss stay accurate across the full range") {
  if (!kernels::cpu_has_avx2()) return;
  // Projections this large saturate tanh and underflow gauss; both paths
  // must agree with libm, including the saturated tails.
  const std::int64_t n = 4001;
  std::vector<double> x(n);
  for (std::int64_t t = 0; t < n; ++t) x[t] = -40.0 + 80.0 * double(t) / double(n - 1);
  const double w = 1.0;
  for (Contrast c : {Contrast::tanh, Contrast::gauss}) {
    double gp_s, gp_v;
    double gx_s, gx_v;
    kernels::contrast_pass(Isa::scalar, c, x.data(), 1, n, &w, &gp_s, &gx_s);
    kernels::contrast_pass(Isa::avx2, c, x.data(), 1, n, &w, &gp_v, &gx_v);
    CHECK(close(gp_v, gp_s, 1e-12, 1e-11));
    CHECK(close(gx_v, gx_s, 1e-12, 1e-11));
  }
}

TEST_CASE("channel counts past the register budget fall back cleanly") {
  if (!kernels::cpu_has_avx2()) return;
  const int d = 65;  // one past the accumulator budget
  const std::int64_t n = 97;
  const auto x = random_block(d, n, rng::derive(5, 65));
  std::vector<double> w(d, 1.0 / std::sqrt(double(d)));
  double gp_s, gp_v;
  std::vector<double> gx_s(d), gx_v(d);
  kernels::contrast_pass(Isa::scalar, Contrast::tanh, x.data(), d, n, w.data(), &gp_s, gx_s.data());
  kernels::contrast_pass(Isa::avx2, Contrast::tanh, x.data(), d, n, w.data(), &gp_v, gx_v.data());
  CHECK(gp_v == gp_s);  // the fallback is the scalar path, bit for bit
  for (int k = 0; k < d; ++k) CHECK(gx_v[k] == gx_s[k]);
}

TEST_CASE("dispatching overloads follow the active isa") {
  IsaRestore restore;
  const int d = 2;
  const std::int64_t n = 33;
  const auto x = random_block(d, n, rng::derive(6, 1));
  std::vector<double> m1(d), m2(d);
  REQUIRE(kernels::select("scalar"));
  kernels::row_means(x.data(), d, n, m1.data());
  kernels::row_means(Isa::scalar, x.data(), d, n, m2.data());
  CHECK(m1 == m2);
}

}  // TEST_SUITE
