#pragma once

// Lane-level math and accumulation order shared by every kernel backend.
//
// The SIMD backends reimplement these functions on vector registers with the
// same constants and the same operation order, and the scalar versions below
// also serve as the tail path inside the SIMD kernels. Together with
// -ffp-contract=off on all kernel translation units (no silent FMA fusion),
// that is what makes backends bit-identical. Any change here must be mirrored
// in kernels_avx2.cpp and kernels_neon.cpp.
//
// exp_core: Cody-Waite reduction x = n*log(2) + r with n rounded to nearest
// even, rational minimax approximation of e^r, reconstruction by two
// exponent-field multiplies so 2^n never overflows on its own (n can reach
// 1024). Inputs above kExpHi return inf, below kExpLo return 0; results that
// would be subnormal are flushed to zero by that cutoff.
//
// log1p_unit: log(1 + u) for u in [0, 1] via the atanh series in
// s = u / (2 + u). Sixteen series terms keep the truncation error below
// 1e-16 relative on this domain.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace un::kernels::lane {

inline constexpr double kExpHi = 709.78271289338397;
inline constexpr double kExpLo = -708.39641853226408;
inline constexpr double kLog2E = 1.44269504088896340736;
inline constexpr double kExpC1 = 6.93145751953125e-1;
inline constexpr double kExpC2 = 1.42860682030941723212e-6;

inline constexpr double kExpP0 = 1.26177193074810590878e-4;
inline constexpr double kExpP1 = 3.02994407707441961300e-2;
inline constexpr double kExpP2 = 9.99999999999999999910e-1;
inline constexpr double kExpQ0 = 3.00198505138664455042e-6;
inline constexpr double kExpQ1 = 2.52448340349684104192e-3;
inline constexpr double kExpQ2 = 2.27265548208155028766e-1;
inline constexpr double kExpQ3 = 2.00000000000000000005e0;

inline constexpr double kLog1pC[16] = {
    1.0 / 3.0,  1.0 / 5.0,  1.0 / 7.0,  1.0 / 9.0,
    1.0 / 11.0, 1.0 / 13.0, 1.0 / 15.0, 1.0 / 17.0,
    1.0 / 19.0, 1.0 / 21.0, 1.0 / 23.0, 1.0 / 25.0,
    1.0 / 27.0, 1.0 / 29.0, 1.0 / 31.0, 1.0 / 33.0,
};

// 2^k by exponent-field construction; k must lie in [-1022, 1023].
inline double pow2i(std::int64_t k) {
  return std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
}

inline double exp_core(double x) {
  if (std::isnan(x)) return x;
  if (x > kExpHi) return std::numeric_limits<double>::infinity();
  if (x < kExpLo) return 0.0;
  const double nf = std::nearbyint(x * kLog2E);
  const std::int64_t n = static_cast<std::int64_t>(nf);
  double r = x - nf * kExpC1;
  r = r - nf * kExpC2;
  const double xx = r * r;
  const double p = ((kExpP0 * xx + kExpP1) * xx + kExpP2) * r;
  const double q = ((kExpQ0 * xx + kExpQ1) * xx + kExpQ2) * xx + kExpQ3;
  const double e = p / (q - p);
  const double res = 1.0 + 2.0 * e;
  const std::int64_t n1 = n >> 1;
  const std::int64_t n2 = n - n1;
  return res * pow2i(n1) * pow2i(n2);
}

inline double log1p_unit(double u) {
  const double s = u / (2.0 + u);
  const double w = s * s;
  double t = kLog1pC[15];
  for (int k = 14; k >= 0; --k) t = t * w + kLog1pC[k];
  return (2.0 * s) * (1.0 + w * t);
}

// log(1 + exp(x)), stable for any x.
inline double softplus(double x) {
  const double m = x > 0.0 ? x : 0.0;
  const double e = exp_core(-std::fabs(x));
  return m + log1p_unit(e);
}

inline double inv_logit1(double x) { return 1.0 / (1.0 + exp_core(-x)); }

inline double loglik_term(double eta, double z) {
  return z * eta - softplus(eta);
}

// Four running partial sums in lane order, reduced as
// (a0 + a2) + (a1 + a3), then the tail appended sequentially. The SIMD
// backends realize the identical order with one (or two) vector accumulators.
template <typename Term>
double blocked_sum(std::size_t n, Term term) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += term(i);
    a1 += term(i + 1);
    a2 += term(i + 2);
    a3 += term(i + 3);
  }
  double total = (a0 + a2) + (a1 + a3);
  for (; i < n; ++i) total += term(i);
  return total;
}

// Function-pointer table one backend exports; dispatch routes through it.
struct KernelTable {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*weighted_dot)(const double*, const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*inv_logit)(const double*, double*, std::size_t);
  double (*bernoulli_loglik)(const double*, const double*, std::size_t);
};

const KernelTable* scalar_table();
const KernelTable* avx2_table();  // nullptr when not compiled in
const KernelTable* neon_table();  // nullptr when not compiled in

}  // namespace un::kernels::lane
