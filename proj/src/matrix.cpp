#include "un/matrix.hpp"

#include <cmath>

namespace un {

Matrix cholesky(const Matrix& a) {
  const std::size_t p = a.rows();
  if (a.cols() != p) throw DimensionMismatch("cholesky: matrix not square");
  Matrix l(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0) || !std::isfinite(d))
      throw SingularInformation("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < p; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b) {
  const std::size_t p = l.rows();
  if (b.size() != p) throw DimensionMismatch("cholesky_solve: length mismatch");
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < p; ++i) {  // L y = b
    for (std::size_t k = 0; k < i; ++k) x[i] -= l(i, k) * x[k];
    x[i] /= l(i, i);
  }
  for (std::size_t ii = p; ii-- > 0;) {  // L^T x = y
    for (std::size_t k = ii + 1; k < p; ++k) x[ii] -= l(k, ii) * x[k];
    x[ii] /= l(ii, ii);
  }
  return x;
}

Matrix cholesky_inverse(const Matrix& l) {
  const std::size_t p = l.rows();
  Matrix inv(p, p);
  std::vector<double> e(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    e[j] = 1.0;
    const std::vector<double> col = cholesky_solve(l, e);
    for (std::size_t i = 0; i < p; ++i) inv(i, j) = col[i];
    e[j] = 0.0;
  }
  // Symmetrize away round-off so downstream factorizations see an exactly
  // symmetric matrix.
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t i = j + 1; i < p; ++i) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

}  // namespace un
