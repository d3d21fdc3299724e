#pragma once

// Column-major dense matrix plus the small SPD routines needed for logistic
// model fitting (p is tiny, n can be large). Column-major layout means a
// design-matrix column is one contiguous span, which is what the vectorized
// kernels consume.

#include <cstddef>
#include <span>
#include <vector>

#include "un/errors.hpp"

namespace un {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Throws SingularInformation when a pivot is not strictly positive.
Matrix cholesky(const Matrix& a);

// Solves A x = b given the Cholesky factor L of A (forward then back substitution).
std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b);

// Inverse of A from its Cholesky factor, returned as a full symmetric matrix.
Matrix cholesky_inverse(const Matrix& l);

}  // namespace un
