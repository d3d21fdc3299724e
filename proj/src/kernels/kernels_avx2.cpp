// AVX2 backend. Mirrors the scalar lane math operation for operation; the
// remainder loops reuse the scalar functions, which is valid only because the
// vector lanes compute bit-identical results. Built with -mavx2 and
// -ffp-contract=off; without -mavx2 this TU compiles to a null table.

#include <cstddef>

#include "kernels_common.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace un::kernels::lane {
namespace {

// (a0 + a2) + (a1 + a3), the shared reduction order.
inline double reduce4(__m256d acc) {
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d v_exp(__m256d x) {
  const __m256d t = _mm256_mul_pd(x, _mm256_set1_pd(kLog2E));
  const __m128i n32 = _mm256_cvtpd_epi32(t);  // rounds to nearest even
  const __m256d nf = _mm256_cvtepi32_pd(n32);

  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(nf, _mm256_set1_pd(kExpC1)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(nf, _mm256_set1_pd(kExpC2)));

  const __m256d xx = _mm256_mul_pd(r, r);
  __m256d p = _mm256_mul_pd(_mm256_set1_pd(kExpP0), xx);
  p = _mm256_add_pd(p, _mm256_set1_pd(kExpP1));
  p = _mm256_mul_pd(p, xx);
  p = _mm256_add_pd(p, _mm256_set1_pd(kExpP2));
  p = _mm256_mul_pd(p, r);

  __m256d q = _mm256_mul_pd(_mm256_set1_pd(kExpQ0), xx);
  q = _mm256_add_pd(q, _mm256_set1_pd(kExpQ1));
  q = _mm256_mul_pd(q, xx);
  q = _mm256_add_pd(q, _mm256_set1_pd(kExpQ2));
  q = _mm256_mul_pd(q, xx);
  q = _mm256_add_pd(q, _mm256_set1_pd(kExpQ3));

  const __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  __m256d res = _mm256_add_pd(_mm256_set1_pd(1.0),
                              _mm256_mul_pd(_mm256_set1_pd(2.0), e));

  // 2^n as two exponent-field factors, n split as n1 = n >> 1, n2 = n - n1.
  const __m128i n1 = _mm_srai_epi32(n32, 1);
  const __m128i n2 = _mm_sub_epi32(n32, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d s1 = _mm256_castsi256_pd(_mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52));
  const __m256d s2 = _mm256_castsi256_pd(_mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52));
  res = _mm256_mul_pd(_mm256_mul_pd(res, s1), s2);

  // Ordered compares are false on NaN, so NaN lanes keep the arithmetic
  // result (NaN) rather than a blended constant.
  const __m256d hi_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kExpHi), _CMP_GT_OQ);
  const __m256d lo_mask = _mm256_cmp_pd(x, _mm256_set1_pd(kExpLo), _CMP_LT_OQ);
  res = _mm256_blendv_pd(
      res, _mm256_set1_pd(std::numeric_limits<double>::infinity()), hi_mask);
  res = _mm256_blendv_pd(res, _mm256_setzero_pd(), lo_mask);
  return res;
}

inline __m256d v_log1p_unit(__m256d u) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(u, _mm256_add_pd(two, u));
  const __m256d w = _mm256_mul_pd(s, s);
  __m256d t = _mm256_set1_pd(kLog1pC[15]);
  for (int k = 14; k >= 0; --k)
    t = _mm256_add_pd(_mm256_mul_pd(t, w), _mm256_set1_pd(kLog1pC[k]));
  return _mm256_mul_pd(_mm256_mul_pd(two, s),
                       _mm256_add_pd(one, _mm256_mul_pd(w, t)));
}

inline __m256d v_softplus(__m256d x) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d m = _mm256_max_pd(x, _mm256_setzero_pd());
  const __m256d nax = _mm256_xor_pd(_mm256_andnot_pd(sign, x), sign);  // -|x|
  return _mm256_add_pd(m, v_log1p_unit(v_exp(nax)));
}

inline __m256d v_inv_logit(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d nx = _mm256_xor_pd(x, _mm256_set1_pd(-0.0));
  return _mm256_div_pd(one, _mm256_add_pd(one, v_exp(nx)));
}

double a_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = reduce4(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double a_dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc,
                        _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  double total = reduce4(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

double a_weighted_dot(const double* w, const double* x, const double* y,
                      std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wx = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(x + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(wx, _mm256_loadu_pd(y + i)));
  }
  double total = reduce4(acc);
  for (; i < n; ++i) total += (w[i] * x[i]) * y[i];
  return total;
}

void a_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yi = _mm256_add_pd(_mm256_loadu_pd(y + i),
                                     _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, yi);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void a_inv_logit(const double* eta, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, v_inv_logit(_mm256_loadu_pd(eta + i)));
  for (; i < n; ++i) out[i] = inv_logit1(eta[i]);
}

double a_bernoulli_loglik(const double* eta, const double* z, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ev = _mm256_loadu_pd(eta + i);
    const __m256d zv = _mm256_loadu_pd(z + i);
    acc = _mm256_add_pd(acc, _mm256_sub_pd(_mm256_mul_pd(zv, ev), v_softplus(ev)));
  }
  double total = reduce4(acc);
  for (; i < n; ++i) total += loglik_term(eta[i], z[i]);
  return total;
}

constexpr KernelTable kTable = {
    a_sum, a_dot, a_weighted_dot, a_axpy, a_inv_logit, a_bernoulli_loglik,
};

}  // namespace

const KernelTable* avx2_table() { return &kTable; }

}  // namespace un::kernels::lane

#else

namespace un::kernels::lane {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace un::kernels::lane

#endif
