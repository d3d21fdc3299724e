// Scalar reference backend. Defines the result every other backend must
// reproduce bit for bit.

#include <cstddef>

#include "kernels_common.hpp"

namespace un::kernels::lane {
namespace {

double s_sum(const double* x, std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return x[i]; });
}

double s_dot(const double* x, const double* y, std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return x[i] * y[i]; });
}

double s_weighted_dot(const double* w, const double* x, const double* y,
                      std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return (w[i] * x[i]) * y[i]; });
}

void s_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void s_inv_logit(const double* eta, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = inv_logit1(eta[i]);
}

double s_bernoulli_loglik(const double* eta, const double* z, std::size_t n) {
  return blocked_sum(n, [&](std::size_t i) { return loglik_term(eta[i], z[i]); });
}

constexpr KernelTable kTable = {
    s_sum, s_dot, s_weighted_dot, s_axpy, s_inv_logit, s_bernoulli_loglik,
};

}  // namespace

const KernelTable* scalar_table() { return &kTable; }

}  // namespace un::kernels::lane
