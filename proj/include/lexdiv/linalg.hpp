#pragma once

// Small dense linear algebra for the dim x dim problems in alignment, PCA and
// LDA (dim is typically 50). Row-major, double precision.

#include <cstddef>
#include <span>
#include <vector>

namespace lexdiv::linalg {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transpose() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
// aᵀ·b without materializing the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& a);
Matrix subtract(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double cosine(std::span<const double> a, std::span<const double> b);

struct Svd {
  Matrix u;                    // n x n, orthonormal columns
  std::vector<double> sigma;   // descending
  Matrix v;                    // n x n, orthonormal columns
};

// One-sided Jacobi SVD of a square matrix. Columns of U belonging to zero
// singular values are completed to an orthonormal basis.
Svd jacobi_svd(const Matrix& m, double tol = 1e-15, int max_sweeps = 100);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen jacobi_eigen(const Matrix& sym, double tol = 1e-14, int max_sweeps = 100);

// Solves a·x = b for symmetric positive-definite a. Throws Runtime if a is
// not numerically positive-definite.
std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b);

// Residual max |(QᵀQ - I)_ij|.
double orthogonality_residual(const Matrix& q);

}  // namespace lexdiv::linalg
