#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>

#include "svici/gauss.hpp"
#include "svici/polyhedral.hpp"
#include "svici/report.hpp"
#include "svici/rng.hpp"

namespace svici {

/// Piecewise normal distribution: Z = z0 + Gamma^{-1} Y with Y ~ N(0, Sigma)
/// and Gamma a piecewise linear homeomorphism whose conical subdivision has
/// common lineality space E. The center z0 lies in the known affine set
/// A = a0 + E; harnesses that know z0 pass it for sampling, while the CI
/// operations use only (a0, E).
class PiecewiseNormalModel {
 public:
  PiecewiseNormalModel(PiecewiseLinearMap gamma, CovMatrix sigma, Vector a0,
                       std::optional<Vector> z0 = std::nullopt);

  const PiecewiseLinearMap& gamma() const { return gamma_; }
  const CovMatrix& sigma() const { return sigma_; }
  const Vector& a0() const { return a0_; }
  const SubspaceBasis& lineality() const { return e_; }
  const Vector& center() const;  // throws if hidden

  std::size_t dim() const { return gamma_.dim(); }

  /// Per-piece covariance Q_i = M_i^{-1} Sigma M_i^{-T} (cached).
  const CovMatrix& piece_cov(std::uint64_t index) const;
  /// Gamma^{-1}(y) together with the index of the piece containing it.
  std::pair<Vector, std::uint64_t> invert(const Vector& y) const;

 private:
  struct PieceData {
    Lu lu;        // factorization of M_i
    ConePattern cone;
    CovMatrix q;
  };
  const PieceData& piece_data(std::uint64_t index) const;

  PiecewiseLinearMap gamma_;
  CovMatrix sigma_;
  Vector a0_;
  std::optional<Vector> z0_;
  SubspaceBasis e_;
  // Piece caches are fully precomputed for small maps (immutability keeps
  // the model safe for concurrent use).
  std::shared_ptr<std::map<std::uint64_t, PieceData>> cache_;
};

/// One draw of Z: sample Y ~ N(0, Sigma), locate the piece with
/// M_i^{-1} Y in K_i, return z0 + M_i^{-1} Y. Requires a known center.
Vector sample_z(const PiecewiseNormalModel& model, RngStream& rng);

/// Exact finite-sample confidence intervals for z0 given one observation:
/// identify the piece of z - a0, set Lambda = Q_i, center
/// Pi_E(Lambda)(z - a0) + a0, half-widths delta_j^alpha(Lambda, Pi_E).
IntervalReport exact_ci(const PiecewiseNormalModel& model, const Vector& z_obs,
                        double alpha);

/// Piece-indexed covariance Lambda_N = Q_i for z_n in Int(K_i + A); the
/// plug-in for the asymptotic interval construction.
CovMatrix asymptotic_lambda(const PiecewiseNormalModel& model,
                            const Vector& z_n);

}  // namespace svici
