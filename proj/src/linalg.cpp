#include "svici/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svici/kernels.hpp"

namespace svici {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  d_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error("ragged matrix initializer");
    d_.insert(d_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error("matmul shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      kernels::axpy(arow[k], b.row(k), crow, b.cols());
    }
  }
  return c;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("matrix add shape mismatch");
  Matrix c = a;
  kernels::axpy(1.0, b.data(), c.data(), b.rows() * b.cols());
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("matrix sub shape mismatch");
  Matrix c = a;
  kernels::axpy(-1.0, b.data(), c.data(), b.rows() * b.cols());
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (std::size_t i = 0; i < c.rows() * c.cols(); ++i) c.data()[i] *= s;
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw Error("matvec shape mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    y[i] = kernels::dot(a.row(i), x.data(), a.cols());
  return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size()) throw Error("matvec shape mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    kernels::axpy(x[i], a.row(i), y.data(), a.cols());
  return y;
}

double norm_max(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
    m = std::max(m, std::abs(a.data()[i]));
  return m;
}

void symmetrize(Matrix& a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
}

double dot(const Vector& a, const Vector& b) {
  return kernels::dot(a.data(), b.data(), a.size());
}

double norm_inf(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

Vector operator+(const Vector& a, const Vector& b) {
  Vector c = a;
  kernels::axpy(1.0, b.data(), c.data(), b.size());
  return c;
}

Vector operator-(const Vector& a, const Vector& b) {
  Vector c = a;
  kernels::axpy(-1.0, b.data(), c.data(), b.size());
  return c;
}

Vector operator*(double s, const Vector& a) {
  Vector c = a;
  for (double& v : c) v *= s;
  return c;
}

Cholesky Cholesky::factor(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("cholesky: not square");
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
      max_diag;

  Cholesky c;
  c.l_ = Matrix(n, n);
  c.min_pivot_ = std::numeric_limits<double>::infinity();
  Matrix& l = c.l_;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - kernels::dot(l.row(j), l.row(j), j);
    if (!(d > tol))
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) +
                                " at column " + std::to_string(j));
    c.min_pivot_ = std::min(c.min_pivot_, d);
    const double s = std::sqrt(d);
    l(j, j) = s;
    for (std::size_t i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - kernels::dot(l.row(i), l.row(j), j)) / s;
    }
  }
  return c;
}

Vector Cholesky::solve_lower(const Vector& b) const {
  const std::size_t n = dim();
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = (b[i] - kernels::dot(l_.row(i), x.data(), i)) / l_(i, i);
  return x;
}

Vector Cholesky::solve(const Vector& b) const {
  const std::size_t n = dim();
  Vector y = solve_lower(b);
  // L^T x = y
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
    x[ii] = s / l_(ii, ii);
  }
  return x;
}

Matrix Cholesky::solve(const Matrix& b) const {
  Matrix bt = transpose(b);
  Matrix xt(bt.rows(), bt.cols());
  Vector col(b.rows());
  for (std::size_t j = 0; j < bt.rows(); ++j) {
    col.assign(bt.row(j), bt.row(j) + bt.cols());
    Vector x = solve(col);
    std::copy(x.begin(), x.end(), xt.row(j));
  }
  return transpose(xt);
}

Matrix Cholesky::inverse() const { return solve(Matrix::identity(dim())); }

Lu Lu::factor(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error("lu: not square");
  const std::size_t n = a.rows();
  Lu f;
  f.lu_ = a;
  f.perm_.resize(n);
  Matrix& lu = f.lu_;
  double max_entry = norm_max(a);
  const double tol = std::max(max_entry, 1.0) *
                     std::numeric_limits<double>::epsilon() *
                     static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > tol))
      throw SingularMatrix("lu: singular at column " + std::to_string(k));
    f.perm_[k] = p;
    if (p != k)
      std::swap_ranges(lu.row(k), lu.row(k) + n, lu.row(p));
    const double piv = lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      double m = lu(i, k) / piv;
      lu(i, k) = m;
      kernels::axpy(-m, lu.row(k) + k + 1, lu.row(i) + k + 1, n - k - 1);
    }
  }
  return f;
}

Vector Lu::solve(const Vector& b) const {
  const std::size_t n = dim();
  Vector x = b;
  for (std::size_t k = 0; k < n; ++k) {
    std::swap(x[k], x[perm_[k]]);
    for (std::size_t i = k + 1; i < n; ++i) x[i] -= lu_(i, k) * x[k];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii] - kernels::dot(lu_.row(ii) + ii + 1, x.data() + ii + 1,
                                    n - ii - 1);
    x[ii] = s / lu_(ii, ii);
  }
  return x;
}

Matrix Lu::solve(const Matrix& b) const {
  Matrix bt = transpose(b);
  Matrix xt(bt.rows(), bt.cols());
  Vector col;
  for (std::size_t j = 0; j < bt.rows(); ++j) {
    col.assign(bt.row(j), bt.row(j) + bt.cols());
    Vector x = solve(col);
    std::copy(x.begin(), x.end(), xt.row(j));
  }
  return transpose(xt);
}

Vector Lu::solve_transposed(const Vector& b) const {
  // PA = LU, so A^T = U^T L^T P: solve U^T w = b, L^T y = w, x = P^T y.
  const std::size_t n = dim();
  Vector w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= lu_(k, i) * w[k];
    w[i] = s / lu_(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = w[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(k, ii) * w[k];
    w[ii] = s;
  }
  for (std::size_t k = n; k-- > 0;) std::swap(w[k], w[perm_[k]]);
  return w;
}

Matrix Lu::solve_transposed(const Matrix& b) const {
  Matrix bt = transpose(b);
  Matrix xt(bt.rows(), bt.cols());
  Vector col;
  for (std::size_t j = 0; j < bt.rows(); ++j) {
    col.assign(bt.row(j), bt.row(j) + bt.cols());
    Vector x = solve_transposed(col);
    std::copy(x.begin(), x.end(), xt.row(j));
  }
  return transpose(xt);
}

Matrix Lu::inverse() const { return solve(Matrix::identity(dim())); }

BandCholesky BandCholesky::factor(const Matrix& a, std::size_t kd) {
  if (a.rows() != a.cols()) throw Error("band cholesky: not square");
  const std::size_t n = a.rows();
  kd = std::min(kd, n ? n - 1 : 0);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol =
      static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
      max_diag;

  BandCholesky c;
  c.n_ = n;
  c.kd_ = kd;
  c.band_.assign((kd + 1) * n, 0.0);
  auto at = [&](std::size_t r, std::size_t j) -> double& {
    return c.band_[r * n + j];
  };
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    std::size_t k0 = j > kd ? j - kd : 0;
    for (std::size_t k = k0; k < j; ++k) {
      double l = at(j - k, k);
      d -= l * l;
    }
    if (!(d > tol))
      throw NotPositiveDefinite("band cholesky: pivot at column " +
                                std::to_string(j));
    const double s = std::sqrt(d);
    at(0, j) = s;
    for (std::size_t i = j + 1; i < std::min(n, j + kd + 1); ++i) {
      double v = a(i, j);
      std::size_t kk0 = i > kd ? i - kd : 0;
      for (std::size_t k = std::max(k0, kk0); k < j; ++k)
        v -= at(i - k, k) * at(j - k, k);
      at(i - j, j) = v / s;
    }
  }
  return c;
}

Vector BandCholesky::solve(const Vector& b) const {
  const std::size_t n = n_;
  auto at = [&](std::size_t r, std::size_t j) { return band_[r * n + j]; };
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    std::size_t k0 = i > kd_ ? i - kd_ : 0;
    for (std::size_t k = k0; k < i; ++k) s -= at(i - k, k) * y[k];
    y[i] = s / at(0, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < std::min(n, ii + kd_ + 1); ++k)
      s -= at(k - ii, ii) * x[k];
    x[ii] = s / at(0, ii);
  }
  return x;
}

}  // namespace svici
