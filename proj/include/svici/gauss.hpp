#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "svici/linalg.hpp"
#include "svici/rng.hpp"

namespace svici {

/// Symmetric positive definite covariance matrix. Construction verifies
/// symmetry (1e-12 relative) and strict positive definiteness via Cholesky
/// pivots; the lower factor is cached for sampling and solves.
class CovMatrix {
 public:
  static CovMatrix from_matrix(Matrix m);

  std::size_t dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  const Cholesky& chol() const { return chol_; }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  CovMatrix(Matrix m, Cholesky c) : m_(std::move(m)), chol_(std::move(c)) {}
  Matrix m_;
  Cholesky chol_;
};

/// Basis of a subspace of R^n, stored as an n x k full-column-rank matrix.
/// k = 0 encodes the trivial subspace {0}.
class SubspaceBasis {
 public:
  static SubspaceBasis trivial(std::size_t ambient);
  /// Verifies full column rank (column-pivoted elimination).
  static SubspaceBasis from_columns(std::size_t ambient, Matrix basis);
  /// Subspace spanned by the given standard basis vectors.
  static SubspaceBasis axis_aligned(std::size_t ambient,
                                    const std::vector<std::size_t>& coords);

  std::size_t ambient_dim() const { return ambient_; }
  std::size_t dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  /// True iff the j-th component of every element of the subspace is zero.
  bool row_is_zero(std::size_t j) const;

 private:
  SubspaceBasis(std::size_t ambient, Matrix b)
      : ambient_(ambient), basis_(std::move(b)) {}
  std::size_t ambient_ = 0;
  Matrix basis_;  // n x k
};

/// Projector onto a subspace E along the Sigma-dependent complement V that
/// makes the E- and V- components of a N(0,Sigma) vector independent.
class ObliqueProjector {
 public:
  ObliqueProjector(Matrix p, SubspaceBasis e, Matrix cond_cov)
      : p_(std::move(p)), e_(std::move(e)), cond_cov_(std::move(cond_cov)) {}

  const Matrix& matrix() const { return p_; }
  const SubspaceBasis& subspace() const { return e_; }
  /// k x k conditional covariance block (covariance of P*Y in basis coords).
  const Matrix& cond_cov() const { return cond_cov_; }
  /// Variance of (P*Y)_j, i.e. (W1 * cond_cov * W1^T)_jj. Exactly zero when
  /// row j of the basis is zero.
  double cond_var(std::size_t j) const;
  Vector apply(const Vector& v) const { return matvec(p_, v); }

 private:
  Matrix p_;
  SubspaceBasis e_;
  Matrix cond_cov_;
};

/// Builds the projector onto E along V per the covariance-dependent
/// construction. If no complement basis is supplied, one is completed
/// deterministically from standard basis vectors (greedy largest residual).
/// The result does not depend on that choice.
ObliqueProjector build_projector(const SubspaceBasis& e,
                                 const std::optional<Matrix>& w2,
                                 const CovMatrix& sigma);

/// Half-width delta_j^alpha = sqrt(chi2_1(alpha) * Var[(P Y)_j]).
double delta_half_width(const ObliqueProjector& p, double alpha,
                        std::size_t j);

/// Generalized half-width sqrt(chi2_1(alpha) * f_row * Q * f_row^T) for an
/// arbitrary row f_row of a matrix-valued function evaluated at Q.
double delta_general(const CovMatrix& q, const Vector& f_row, double alpha);

/// Upper-tail chi-square critical value: P(U > x) = alpha for U ~ chi2(dof).
double chi2_quantile(int dof, double alpha);

/// Standard normal quantile Phi^{-1}(p).
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

/// One draw from N(0, Sigma) = L * g with L the cached Cholesky factor.
Vector mvn_sample(const CovMatrix& sigma, RngStream& rng);

namespace detail {
/// Coupling block B = S12 * S22^{-1} of the transformed covariance
/// W^{-1} Sigma W^{-T}; the unique B making the projection independent.
Matrix coupling_block(const Matrix& w1, const Matrix& w2, const Matrix& sigma);
/// Projector onto span(W1) along span(W1*B + W2) for an arbitrary coupling
/// block B. Exposed so tests can falsify the independence identity for
/// perturbed B.
Matrix projector_from_coupling(const Matrix& w1, const Matrix& w2,
                               const Matrix& b);
/// Deterministic complement completion used when W2 is not supplied.
Matrix complete_basis(const Matrix& w1, std::size_t ambient);
}  // namespace detail

}  // namespace svici
