#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "svici/gauss.hpp"
#include "svici/polyhedral.hpp"
#include "svici/rng.hpp"

namespace svici {

/// Stochastic affine variational inequality 0 in E[A(xi)] x + E[b(xi)] + N_S(x)
/// with S a box. A problem maps a block of uniform variates to one draw
/// (A(xi), b(xi)); the variate count per draw is fixed, so draws are
/// re-derivable from (seed, index) and never stored.
class SviProblem {
 public:
  virtual ~SviProblem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;
  virtual const BoxSet& feasible_set() const = 0;
  virtual std::size_t variates_per_draw() const = 0;

  /// Adds one draw (A(xi), b(xi)) into the accumulators; u holds
  /// variates_per_draw() uniforms in [0,1).
  virtual void add_draw(const double* u, Matrix& a_acc,
                        Vector& b_acc) const = 0;
  /// f_out = A(xi(u)) x + b(xi(u)).
  virtual void apply_draw(const double* u, const Vector& x,
                          Vector& f_out) const = 0;

  /// Non-null when A(xi) is deterministic (draws only affect b).
  virtual const Matrix* fixed_a() const { return nullptr; }
  /// Half-bandwidth of A when the problem is banded.
  virtual std::optional<std::size_t> bandwidth() const { return std::nullopt; }

  virtual Matrix mean_a() const = 0;
  virtual Vector mean_b() const = 0;

  /// Known truth for harness use.
  virtual std::optional<Vector> true_z() const { return std::nullopt; }
  virtual std::optional<Vector> true_x() const { return std::nullopt; }

  /// Indices with nonzero true z / x (active coordinates of the study).
  std::vector<std::size_t> active_z() const;
  std::vector<std::size_t> active_x() const;

  /// Normal-map residual of the supplied truth under the mean problem;
  /// throws if it exceeds 1e-10 scale.
  void verify_truth() const;
};

/// SAA means over n_samples draws.
struct SaaAssembly {
  Matrix a_bar;
  Vector b_bar;
  std::size_t n_samples = 0;
};

SaaAssembly assemble_saa(const SviProblem& problem, std::size_t n_samples,
                         RngStream stream);

/// Solves the piecewise-linear normal-map equation
/// a_bar * clamp(z) + b_bar + z - clamp(z) = 0 by semismooth Newton on the
/// active sign pattern. Returns (z, clamp(z)). A declared bandwidth routes
/// the pattern systems through a banded Cholesky.
std::pair<Vector, Vector> solve_normal_map(
    const Matrix& a_bar, const Vector& b_bar, const BoxSet& s,
    const Vector& start, std::optional<std::size_t> bandwidth = std::nullopt);

/// Lemke complementary pivoting with lexicographic ratio test. Oracle-scale
/// LCP solver for S = R^n_+: returns x >= 0 with Mx+q >= 0, x'(Mx+q) = 0.
Vector solve_lcp_lemke(const Matrix& m, const Vector& q);

/// Unbiased sample covariance of {F(x_n, xi^i)} over the same draw stream
/// used for assembly (second streaming pass).
CovMatrix estimate_sigma(const SviProblem& problem, const SaaAssembly& saa,
                         const Vector& x_n, RngStream stream);

/// M_N = a_bar * D + I - D with D the 0/1 diagonal selector of the n-cell
/// containing z_n. Throws DegenerateSolution when z_n is within tolerance of
/// a cell boundary.
Matrix jacobian_mn(const Matrix& a_bar, const Vector& z_n, const BoxSet& s);

/// SAA solution bundle consumed by the inference module.
struct SaaSolution {
  Vector z_n;
  Vector x_n;
  Matrix m_n;
  CovMatrix sigma_n;
  std::size_t n_samples;
  Cell cell;  // n-cell of the normal manifold containing z_n
};

/// Full single-replication flow: assemble -> solve -> M_N -> Sigma_N.
/// When the semismooth Newton solver reports no convergence on an orthant
/// problem, falls back to the Lemke oracle (the P-matrix solution is unique).
SaaSolution solve_saa(const SviProblem& problem, std::size_t n_samples,
                      RngStream stream);

/// Builds an SaaSolution from externally supplied data (replays printed SAA
/// problems; sigma must be supplied since draws are unavailable).
SaaSolution solution_from_saa_data(const Matrix& a_bar, const Vector& b_bar,
                                   const BoxSet& s, CovMatrix sigma_n,
                                   std::size_t n_samples,
                                   std::optional<std::size_t> bandwidth =
                                       std::nullopt);

/// Built-in experiment generators: "lcp-example1", "lcp-example2",
/// "lcp-example3" (triangular-mean uniform LCPs), "qp-banded" (tridiagonal
/// quadratic program shape).
std::unique_ptr<SviProblem> make_builtin_problem(const std::string& name,
                                                 std::size_t n);

/// Custom affine problem: per-entry uniform ranges for A and b.
struct CustomProblemDef {
  std::size_t dim = 0;
  BoxSet set;
  Matrix a_lo, a_hi;
  Vector b_lo, b_hi;
  std::optional<Vector> z0;
  std::optional<std::size_t> band;
};

std::unique_ptr<SviProblem> make_custom_problem(CustomProblemDef def);

}  // namespace svici
