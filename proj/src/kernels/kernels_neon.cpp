// NEON backend (aarch64). The four-lane accumulation order is realized with
// two float64x2 registers: acc0 carries block lanes 0 and 1, acc1 lanes 2 and
// 3, reduced as (a0 + a2) + (a1 + a3) like the other backends. No fused
// multiply-add intrinsics anywhere, matching -ffp-contract=off.

#include <cstddef>

#include "kernels_common.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace un::kernels::lane {
namespace {

inline double reduce4(float64x2_t acc0, float64x2_t acc1) {
  const float64x2_t s = vaddq_f64(acc0, acc1);
  return vgetq_lane_f64(s, 0) + vgetq_lane_f64(s, 1);
}

inline float64x2_t v_exp(float64x2_t x) {
  const float64x2_t t = vmulq_f64(x, vdupq_n_f64(kLog2E));
  const float64x2_t nf = vrndnq_f64(t);  // round to nearest even
  const int64x2_t n = vcvtq_s64_f64(nf);

  float64x2_t r = vsubq_f64(x, vmulq_f64(nf, vdupq_n_f64(kExpC1)));
  r = vsubq_f64(r, vmulq_f64(nf, vdupq_n_f64(kExpC2)));

  const float64x2_t xx = vmulq_f64(r, r);
  float64x2_t p = vmulq_f64(vdupq_n_f64(kExpP0), xx);
  p = vaddq_f64(p, vdupq_n_f64(kExpP1));
  p = vmulq_f64(p, xx);
  p = vaddq_f64(p, vdupq_n_f64(kExpP2));
  p = vmulq_f64(p, r);

  float64x2_t q = vmulq_f64(vdupq_n_f64(kExpQ0), xx);
  q = vaddq_f64(q, vdupq_n_f64(kExpQ1));
  q = vmulq_f64(q, xx);
  q = vaddq_f64(q, vdupq_n_f64(kExpQ2));
  q = vmulq_f64(q, xx);
  q = vaddq_f64(q, vdupq_n_f64(kExpQ3));

  const float64x2_t e = vdivq_f64(p, vsubq_f64(q, p));
  float64x2_t res = vaddq_f64(vdupq_n_f64(1.0), vmulq_f64(vdupq_n_f64(2.0), e));

  const int64x2_t n1 = vshrq_n_s64(n, 1);
  const int64x2_t n2 = vsubq_s64(n, n1);
  const int64x2_t bias = vdupq_n_s64(1023);
  const float64x2_t s1 =
      vreinterpretq_f64_s64(vshlq_n_s64(vaddq_s64(n1, bias), 52));
  const float64x2_t s2 =
      vreinterpretq_f64_s64(vshlq_n_s64(vaddq_s64(n2, bias), 52));
  res = vmulq_f64(vmulq_f64(res, s1), s2);

  // Compares are false on NaN lanes, which therefore keep their NaN result.
  const uint64x2_t hi = vcgtq_f64(x, vdupq_n_f64(kExpHi));
  const uint64x2_t lo = vcltq_f64(x, vdupq_n_f64(kExpLo));
  res = vbslq_f64(hi, vdupq_n_f64(std::numeric_limits<double>::infinity()), res);
  res = vbslq_f64(lo, vdupq_n_f64(0.0), res);
  return res;
}

inline float64x2_t v_log1p_unit(float64x2_t u) {
  const float64x2_t two = vdupq_n_f64(2.0);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t s = vdivq_f64(u, vaddq_f64(two, u));
  const float64x2_t w = vmulq_f64(s, s);
  float64x2_t t = vdupq_n_f64(kLog1pC[15]);
  for (int k = 14; k >= 0; --k)
    t = vaddq_f64(vmulq_f64(t, w), vdupq_n_f64(kLog1pC[k]));
  return vmulq_f64(vmulq_f64(two, s), vaddq_f64(one, vmulq_f64(w, t)));
}

inline float64x2_t v_softplus(float64x2_t x) {
  const float64x2_t m = vmaxq_f64(x, vdupq_n_f64(0.0));
  const float64x2_t nax = vnegq_f64(vabsq_f64(x));
  return vaddq_f64(m, v_log1p_unit(v_exp(nax)));
}

inline float64x2_t v_inv_logit(float64x2_t x) {
  const float64x2_t one = vdupq_n_f64(1.0);
  return vdivq_f64(one, vaddq_f64(one, v_exp(vnegq_f64(x))));
}

double n_sum(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(x + i + 2));
  }
  double total = reduce4(acc0, acc1);
  for (; i < n; ++i) total += x[i];
  return total;
}

double n_dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double total = reduce4(acc0, acc1);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

double n_weighted_dot(const double* w, const double* x, const double* y,
                      std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t wx0 = vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i));
    const float64x2_t wx1 = vmulq_f64(vld1q_f64(w + i + 2), vld1q_f64(x + i + 2));
    acc0 = vaddq_f64(acc0, vmulq_f64(wx0, vld1q_f64(y + i)));
    acc1 = vaddq_f64(acc1, vmulq_f64(wx1, vld1q_f64(y + i + 2)));
  }
  double total = reduce4(acc0, acc1);
  for (; i < n; ++i) total += (w[i] * x[i]) * y[i];
  return total;
}

void n_axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(av, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void n_inv_logit(const double* eta, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, v_inv_logit(vld1q_f64(eta + i)));
  for (; i < n; ++i) out[i] = inv_logit1(eta[i]);
}

double n_bernoulli_loglik(const double* eta, const double* z, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t e0 = vld1q_f64(eta + i);
    const float64x2_t e1 = vld1q_f64(eta + i + 2);
    acc0 = vaddq_f64(
        acc0, vsubq_f64(vmulq_f64(vld1q_f64(z + i), e0), v_softplus(e0)));
    acc1 = vaddq_f64(
        acc1, vsubq_f64(vmulq_f64(vld1q_f64(z + i + 2), e1), v_softplus(e1)));
  }
  double total = reduce4(acc0, acc1);
  for (; i < n; ++i) total += loglik_term(eta[i], z[i]);
  return total;
}

constexpr KernelTable kTable = {
    n_sum, n_dot, n_weighted_dot, n_axpy, n_inv_logit, n_bernoulli_loglik,
};

}  // namespace

const KernelTable* neon_table() { return &kTable; }

}  // namespace un::kernels::lane

#else

namespace un::kernels::lane {
const KernelTable* neon_table() { return nullptr; }
}  // namespace un::kernels::lane

#endif
