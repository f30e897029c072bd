#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "svici/common.hpp"

namespace svici {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return d_[i * cols_ + j];
  }
  double* row(std::size_t i) { return d_.data() + i * cols_; }
  const double* row(std::size_t i) const { return d_.data() + i * cols_; }
  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector d_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix transpose(const Matrix& a);
Vector matvec(const Matrix& a, const Vector& x);
Vector matvec_transposed(const Matrix& a, const Vector& x);

/// max_ij |a_ij|
double norm_max(const Matrix& a);
/// symmetrizes in place: a <- (a + a^T)/2
void symmetrize(Matrix& a);

double dot(const Vector& a, const Vector& b);
double norm_inf(const Vector& a);
double norm2(const Vector& a);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);

/// Lower-triangular Cholesky factorization of a symmetric PD matrix.
/// Rejects non-PD input: a pivot d satisfies d <= n * eps * max_diag.
class Cholesky {
 public:
  static Cholesky factor(const Matrix& a);

  const Matrix& lower() const { return l_; }
  std::size_t dim() const { return l_.rows(); }

  Vector solve(const Vector& b) const;        // A x = b
  Matrix solve(const Matrix& b) const;        // A X = B
  Vector solve_lower(const Vector& b) const;  // L x = b
  Matrix inverse() const;
  double min_pivot() const { return min_pivot_; }

 private:
  Matrix l_;
  double min_pivot_ = 0.0;
};

/// LU factorization with partial pivoting.
class Lu {
 public:
  static Lu factor(const Matrix& a);

  Vector solve(const Vector& b) const;             // A x = b
  Matrix solve(const Matrix& b) const;             // A X = B
  Vector solve_transposed(const Vector& b) const;  // A^T x = b
  Matrix solve_transposed(const Matrix& b) const;  // A^T X = B
  Matrix inverse() const;
  std::size_t dim() const { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

/// Cholesky factorization of a symmetric banded PD matrix given by its dense
/// representation and half-bandwidth kd (entries with |i-j| > kd are ignored).
/// Lower band storage: band(r, j) = L(j+r, j) for r = 0..kd.
class BandCholesky {
 public:
  static BandCholesky factor(const Matrix& a, std::size_t kd);

  Vector solve(const Vector& b) const;
  std::size_t dim() const { return n_; }
  std::size_t bandwidth() const { return kd_; }

 private:
  std::size_t n_ = 0, kd_ = 0;
  Vector band_;  // (kd+1) x n, band_[r * n + j]
};

}  // namespace svici
