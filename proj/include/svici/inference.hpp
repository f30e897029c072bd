#pragma once

#include "svici/polyhedral.hpp"
#include "svici/report.hpp"
#include "svici/svi.hpp"

namespace svici {

/// Ellipsoidal confidence region for z0:
/// { z : N (z - z_N)^T shape (z - z_N) <= chi2_n(alpha1) }, stored with the
/// threshold chi2_n(alpha1)/N folded in. lambda = shape^{-1} gives the exact
/// axis-aligned extents.
struct ConfidenceRegion {
  Vector center;
  Matrix shape;   // M_N^T Sigma_N^{-1} M_N
  Matrix lambda;  // shape^{-1} = M_N^{-1} Sigma_N M_N^{-T}
  double threshold = 0.0;
  double alpha1 = 0.0;
  std::size_t n_samples = 0;

  bool contains(const Vector& z) const;
  /// Half-extent of the region along coordinate j: sqrt(threshold*lambda_jj).
  double extent(std::size_t j) const;
};

ConfidenceRegion confidence_region(const SaaSolution& sol, double alpha1);

/// Plug-in covariance Lambda_N = M_N^{-1} Sigma_N M_N^{-T}.
CovMatrix lambda_hat(const SaaSolution& sol);

/// Smallest-dimension cell intersecting the confidence region and the n-cell
/// p_n: per-coordinate screen by exact axis-aligned extents, exact joint
/// membership via an active-set quadratic minimization over the candidate
/// face, greedy drop of the farthest candidate on rejection.
Cell select_cell(const ConfidenceRegion& q, const Cell& p_n, const BoxSet& s);

/// Confidence intervals for z0 given the selected cell: anchor a0 snaps the
/// pinned coordinates of z_N to their bound, center is
/// Pi_E(Lambda_N)(z_N - a0) + a0, half-widths delta_j^{alpha2}/sqrt(N).
IntervalReport ci_z0(const SaaSolution& sol, const Cell& c, double alpha1,
                     double alpha2);

/// Confidence intervals for x0: x-center is the affine projection of the
/// z-center onto aff(C cap S); half-widths use the composed rows
/// Pi_H . Pi_E(Lambda_N).
IntervalReport ci_x0(const SaaSolution& sol, const Cell& c, const BoxSet& s,
                     double alpha1, double alpha2);

namespace detail {
/// Shared cores that accept a precomputed Lambda_N (one factorization per
/// replication instead of one per interval).
IntervalReport ci_z0_with(const SaaSolution& sol, const Cell& c,
                          const CovMatrix& lambda, double alpha1,
                          double alpha2);
IntervalReport ci_x0_with(const SaaSolution& sol, const Cell& c,
                          const BoxSet& s, const CovMatrix& lambda,
                          double alpha1, double alpha2);
/// Minimum of (z - center)^T shape (z - center) over the face of p_n pinned
/// at `pins` (coordinate -> value), subject to the slab bounds of p_n.
double face_min_quadratic(const ConfidenceRegion& q, const Cell& p_n,
                          const BoxSet& s,
                          const std::vector<std::pair<std::size_t, double>>&
                              pins);
}  // namespace detail

}  // namespace svici
