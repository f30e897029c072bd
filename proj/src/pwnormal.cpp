#include "svici/pwnormal.hpp"

#include <cmath>
#include <mutex>

namespace svici {

namespace {

double piece_tol(const Vector& v) { return 1e-12 * (1.0 + norm_inf(v)); }

}  // namespace

PiecewiseNormalModel::PiecewiseNormalModel(PiecewiseLinearMap gamma,
                                           CovMatrix sigma, Vector a0,
                                           std::optional<Vector> z0)
    : gamma_(std::move(gamma)),
      sigma_(std::move(sigma)),
      a0_(std::move(a0)),
      z0_(std::move(z0)),
      e_(gamma_.lineality_space()),
      cache_(std::make_shared<std::map<std::uint64_t, PieceData>>()) {
  const std::size_t n = gamma_.dim();
  if (sigma_.dim() != n || a0_.size() != n)
    throw Error("piecewise normal model: dimension mismatch");
  if (z0_) {
    if (z0_->size() != n) throw Error("piecewise normal model: bad center");
    // z0 must lie in a0 + E: off-E coordinates agree.
    const double tol = 1e-10 * (1.0 + norm_inf(*z0_) + norm_inf(a0_));
    for (std::size_t j = 0; j < n; ++j)
      if (e_.row_is_zero(j) && std::abs((*z0_)[j] - a0_[j]) > tol)
        throw Error("piecewise normal model: center is not in a0 + E");
  }
  // Precompute piece data for small maps; big maps stay lazy.
  if (gamma_.ambiguous_coords().size() <= 6) {
    for (std::uint64_t i = 0; i < gamma_.piece_count(); ++i) piece_data(i);
  }
}

const Vector& PiecewiseNormalModel::center() const {
  if (!z0_) throw Error("piecewise normal model: center is hidden");
  return *z0_;
}

const PiecewiseNormalModel::PieceData& PiecewiseNormalModel::piece_data(
    std::uint64_t index) const {
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache_->find(index);
  if (it != cache_->end()) return it->second;
  Piece p = gamma_.piece(index);
  Lu lu = Lu::factor(p.m);
  // Q_i = M_i^{-1} Sigma M_i^{-T}
  Matrix x = lu.solve(sigma_.mat());
  Matrix q = transpose(lu.solve(transpose(x)));
  symmetrize(q);
  PieceData data{std::move(lu), std::move(p.cone),
                 CovMatrix::from_matrix(std::move(q))};
  return cache_->emplace(index, std::move(data)).first->second;
}

const CovMatrix& PiecewiseNormalModel::piece_cov(std::uint64_t index) const {
  return piece_data(index).q;
}

std::pair<Vector, std::uint64_t> PiecewiseNormalModel::invert(
    const Vector& y) const {
  const std::size_t z = gamma_.ambiguous_coords().size();
  if (z > PiecewiseLinearMap::kMaxEnumerable)
    throw Error("piecewise map too large to invert by enumeration");
  const std::uint64_t count = gamma_.piece_count();
  for (std::uint64_t i = 0; i < count; ++i) {
    const PieceData& pd = piece_data(i);
    Vector w = pd.lu.solve(y);
    const double tol = piece_tol(w);
    bool strict = true;
    for (std::size_t j = 0; j < w.size() && strict; ++j) {
      switch (pd.cone.c[j]) {
        case ConeCoord::kNonneg: strict = w[j] > tol; break;
        case ConeCoord::kNonpos: strict = w[j] < -tol; break;
        default: break;
      }
    }
    if (strict) return {std::move(w), i};
  }
  throw Error("piecewise map inversion failed: no piece contains the "
              "preimage (boundary event or invalid subdivision)");
}

Vector sample_z(const PiecewiseNormalModel& model, RngStream& rng) {
  Vector y = mvn_sample(model.sigma(), rng);
  auto [w, idx] = model.invert(y);
  return model.center() + w;
}

IntervalReport exact_ci(const PiecewiseNormalModel& model, const Vector& z_obs,
                        double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw Error("exact_ci: alpha must be in (0,1)");
  const Vector v = z_obs - model.a0();
  const std::uint64_t idx =
      model.gamma().piece_index_of(v, piece_tol(v));
  const CovMatrix& lambda = model.piece_cov(idx);
  ObliqueProjector p = build_projector(model.lineality(), std::nullopt, lambda);

  IntervalReport r;
  r.target = Target::kZ0;
  r.center = model.a0() + p.apply(v);
  r.half_widths.resize(v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    r.half_widths[j] = delta_half_width(p, alpha, j);
  r.selected = model.gamma().piece(idx).cone.id();
  r.alpha1 = 0.0;
  r.alpha2 = alpha;
  r.a0 = model.a0();
  return r;
}

CovMatrix asymptotic_lambda(const PiecewiseNormalModel& model,
                            const Vector& z_n) {
  const Vector v = z_n - model.a0();
  const std::uint64_t idx =
      model.gamma().piece_index_of(v, piece_tol(v));
  return model.piece_cov(idx);
}

}  // namespace svici
