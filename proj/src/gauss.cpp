#include "svici/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "svici/kernels.hpp"

namespace svici {

CovMatrix CovMatrix::from_matrix(Matrix m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error("covariance: not a nonempty square matrix");
  const double scale = std::max(norm_max(m), 1e-300);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (std::abs(m(i, j) - m(j, i)) > 1e-12 * scale)
        throw Error("covariance: not symmetric at (" + std::to_string(i) +
                    "," + std::to_string(j) + ")");
  symmetrize(m);
  Cholesky c = Cholesky::factor(m);  // NotPositiveDefinite on failure
  return CovMatrix(std::move(m), std::move(c));
}

SubspaceBasis SubspaceBasis::trivial(std::size_t ambient) {
  return SubspaceBasis(ambient, Matrix(ambient, 0));
}

SubspaceBasis SubspaceBasis::from_columns(std::size_t ambient, Matrix basis) {
  if (basis.rows() != ambient || basis.cols() > ambient)
    throw Error("subspace basis: bad shape");
  // Column-pivoted Gram-Schmidt rank check on a scratch copy.
  const std::size_t k = basis.cols();
  if (k > 0) {
    Matrix w = transpose(basis);  // k x n, rows are candidate columns
    std::vector<bool> used(k, false);
    double max0 = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      max0 = std::max(max0, std::sqrt(kernels::dot(w.row(c), w.row(c),
                                                   ambient)));
    const double tol = std::max(max0, 1.0) * 1e-12;
    for (std::size_t step = 0; step < k; ++step) {
      std::size_t best = k;
      double best_norm = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (used[c]) continue;
        double nn = std::sqrt(kernels::dot(w.row(c), w.row(c), ambient));
        if (nn > best_norm) {
          best_norm = nn;
          best = c;
        }
      }
      if (best == k || best_norm <= tol)
        throw Error("subspace basis: columns are not linearly independent");
      used[best] = true;
      for (double* p = w.row(best); p != w.row(best) + ambient; ++p)
        *p /= best_norm;
      for (std::size_t c = 0; c < k; ++c) {
        if (used[c]) continue;
        double proj = kernels::dot(w.row(c), w.row(best), ambient);
        kernels::axpy(-proj, w.row(best), w.row(c), ambient);
      }
    }
  }
  return SubspaceBasis(ambient, std::move(basis));
}

SubspaceBasis SubspaceBasis::axis_aligned(
    std::size_t ambient, const std::vector<std::size_t>& coords) {
  Matrix b(ambient, coords.size());
  for (std::size_t c = 0; c < coords.size(); ++c) {
    if (coords[c] >= ambient) throw Error("subspace basis: coord out of range");
    b(coords[c], c) = 1.0;
  }
  return SubspaceBasis(ambient, std::move(b));
}

bool SubspaceBasis::row_is_zero(std::size_t j) const {
  for (std::size_t c = 0; c < basis_.cols(); ++c)
    if (basis_(j, c) != 0.0) return false;
  return true;
}

double ObliqueProjector::cond_var(std::size_t j) const {
  const std::size_t k = e_.dim();
  if (k == 0 || e_.row_is_zero(j)) return 0.0;
  Vector u(k);
  for (std::size_t c = 0; c < k; ++c) u[c] = e_.basis()(j, c);
  Vector t = matvec(cond_cov_, u);
  return std::max(0.0, dot(u, t));
}

namespace detail {

Matrix complete_basis(const Matrix& w1, std::size_t ambient) {
  const std::size_t k = w1.cols();
  // Orthonormal frame spanning E, extended one standard basis vector at a
  // time (greedy largest residual), appending the normalized residual.
  Matrix q(ambient, 0);
  std::vector<Vector> frame;
  auto push = [&](Vector v) {
    for (const Vector& f : frame) {
      double p = dot(f, v);
      kernels::axpy(-p, f.data(), v.data(), ambient);
    }
    double nn = norm2(v);
    if (nn > 1e-12) {
      for (double& x : v) x /= nn;
      frame.push_back(std::move(v));
      return true;
    }
    return false;
  };
  for (std::size_t c = 0; c < k; ++c) {
    Vector col(ambient);
    for (std::size_t i = 0; i < ambient; ++i) col[i] = w1(i, c);
    if (!push(std::move(col)))
      throw Error("complement completion: basis not full rank");
  }
  Matrix w2(ambient, ambient - k);
  for (std::size_t step = 0; step < ambient - k; ++step) {
    std::size_t best = ambient;
    double best_res = -1.0;
    for (std::size_t j = 0; j < ambient; ++j) {
      Vector e(ambient, 0.0);
      e[j] = 1.0;
      for (const Vector& f : frame) {
        double p = dot(f, e);
        kernels::axpy(-p, f.data(), e.data(), ambient);
      }
      double r = norm2(e);
      if (r > best_res + 1e-15) {
        best_res = r;
        best = j;
      }
    }
    Vector e(ambient, 0.0);
    e[best] = 1.0;
    for (const Vector& f : frame) {
      double p = dot(f, e);
      kernels::axpy(-p, f.data(), e.data(), ambient);
    }
    double nn = norm2(e);
    for (double& x : e) x /= nn;
    for (std::size_t i = 0; i < ambient; ++i) w2(i, step) = e[i];
    frame.push_back(std::move(e));
  }
  return w2;
}

Matrix coupling_block(const Matrix& w1, const Matrix& w2,
                      const Matrix& sigma) {
  const std::size_t n = sigma.rows();
  const std::size_t k = w1.cols();
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) w(i, c) = w1(i, c);
    for (std::size_t c = 0; c < n - k; ++c) w(i, k + c) = w2(i, c);
  }
  Lu lu = Lu::factor(w);
  Matrix x = lu.solve(sigma);                     // W^{-1} Sigma
  Matrix st = transpose(lu.solve(transpose(x)));  // W^{-1} Sigma W^{-T}
  symmetrize(st);
  Matrix s12(k, n - k), s22(n - k, n - k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < n - k; ++j) s12(i, j) = st(i, k + j);
  for (std::size_t i = 0; i < n - k; ++i)
    for (std::size_t j = 0; j < n - k; ++j) s22(i, j) = st(k + i, k + j);
  Cholesky c22 = Cholesky::factor(s22);
  return transpose(c22.solve(transpose(s12)));  // S12 * S22^{-1}
}

Matrix projector_from_coupling(const Matrix& w1, const Matrix& w2,
                               const Matrix& b) {
  const std::size_t n = w1.rows();
  const std::size_t k = w1.cols();
  Matrix w2t = w1 * b + w2;  // tilde W2
  Matrix wt(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) wt(i, c) = w1(i, c);
    for (std::size_t c = 0; c < n - k; ++c) wt(i, k + c) = w2t(i, c);
  }
  Lu lu = Lu::factor(wt);
  Matrix w1ext(n, n);  // [W1 0]
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) w1ext(i, c) = w1(i, c);
  // P = [W1 0] * Wt^{-1}  =>  P^T = Wt^{-T} [W1 0]^T
  return transpose(lu.solve_transposed(transpose(w1ext)));
}

}  // namespace detail

ObliqueProjector build_projector(const SubspaceBasis& e,
                                 const std::optional<Matrix>& w2,
                                 const CovMatrix& sigma) {
  const std::size_t n = sigma.dim();
  if (e.ambient_dim() != n) throw Error("build_projector: dimension mismatch");
  const std::size_t k = e.dim();

  if (k == 0) return ObliqueProjector(Matrix(n, n), e, Matrix(0, 0));

  if (k == n) {
    Lu lu = Lu::factor(e.basis());
    Matrix x = lu.solve(sigma.mat());
    Matrix cond = transpose(lu.solve(transpose(x)));  // W1^{-1} Sigma W1^{-T}
    symmetrize(cond);
    return ObliqueProjector(Matrix::identity(n), e, std::move(cond));
  }

  Matrix w2m = w2 ? *w2 : detail::complete_basis(e.basis(), n);
  if (w2m.rows() != n || w2m.cols() != n - k)
    throw Error("build_projector: complement basis has wrong shape");

  Matrix b;
  try {
    b = detail::coupling_block(e.basis(), w2m, sigma.mat());
  } catch (const SingularMatrix&) {
    throw SingularMatrix("build_projector: [W1 W2] is singular");
  }
  Matrix p = detail::projector_from_coupling(e.basis(), w2m, b);

  // cond_cov = S11 - B * S21, computed from the same transformed blocks.
  const std::size_t nk = n - k;
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) w(i, c) = e.basis()(i, c);
    for (std::size_t c = 0; c < nk; ++c) w(i, k + c) = w2m(i, c);
  }
  Lu lu = Lu::factor(w);
  Matrix x = lu.solve(sigma.mat());
  Matrix st = transpose(lu.solve(transpose(x)));
  symmetrize(st);
  Matrix s11(k, k), s21(nk, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) s11(i, j) = st(i, j);
  for (std::size_t i = 0; i < nk; ++i)
    for (std::size_t j = 0; j < k; ++j) s21(i, j) = st(k + i, j);
  Matrix cond = s11 - b * s21;
  symmetrize(cond);
  return ObliqueProjector(std::move(p), e, std::move(cond));
}

double delta_half_width(const ObliqueProjector& p, double alpha,
                        std::size_t j) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error("delta: alpha must be in (0,1)");
  if (j >= p.matrix().rows()) throw Error("delta: coordinate out of range");
  const double v = p.cond_var(j);
  if (v == 0.0) return 0.0;
  return std::sqrt(chi2_quantile(1, alpha) * v);
}

double delta_general(const CovMatrix& q, const Vector& f_row, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error("delta: alpha must be in (0,1)");
  if (f_row.size() != q.dim()) throw Error("delta: row length mismatch");
  Vector t = matvec(q.mat(), f_row);
  double v = dot(f_row, t);
  if (v <= 0.0) return 0.0;
  return std::sqrt(chi2_quantile(1, alpha) * v);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Lower regularized incomplete gamma by power series (x < a+1).
double gamma_p_series(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by continued fraction (x >= a+1),
// modified Lentz.
double gamma_q_cf(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("normal_quantile: p not in (0,1)");
  // Acklam rational approximation followed by one Halley step on the CDF.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double chi2_quantile(int dof, double alpha) {
  if (dof < 1) throw Error("chi2_quantile: dof must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error("chi2_quantile: alpha not in (0,1)");
  if (dof == 1) {
    double z = normal_quantile(1.0 - 0.5 * alpha);
    return z * z;
  }
  const double a = 0.5 * dof;
  const double target = 1.0 - alpha;
  double hi = static_cast<double>(dof);
  while (regularized_gamma_p(a, 0.5 * hi) < target && hi < 1e12) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    if (regularized_gamma_p(a, 0.5 * mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Vector mvn_sample(const CovMatrix& sigma, RngStream& rng) {
  const std::size_t n = sigma.dim();
  Vector g(n);
  rng.fill_normal(g.data(), n);
  const Matrix& l = sigma.chol().lower();
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = kernels::dot(l.row(i), g.data(), i + 1);
  return y;
}

}  // namespace svici
