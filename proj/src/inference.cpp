#include "svici/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svici {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool ConfidenceRegion::contains(const Vector& z) const {
  Vector d = z - center;
  Vector sd = matvec(shape, d);
  return dot(d, sd) <= threshold * (1.0 + 1e-12);
}

double ConfidenceRegion::extent(std::size_t j) const {
  return std::sqrt(std::max(0.0, threshold * lambda(j, j)));
}

ConfidenceRegion confidence_region(const SaaSolution& sol, double alpha1) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0))
    throw Error("confidence_region: alpha1 must be in (0,1)");
  const std::size_t n = sol.z_n.size();
  ConfidenceRegion q;
  q.center = sol.z_n;
  q.alpha1 = alpha1;
  q.n_samples = sol.n_samples;
  // shape = M^T Sigma^{-1} M
  Matrix si_m = sol.sigma_n.chol().solve(sol.m_n);
  q.shape = transpose(sol.m_n) * si_m;
  symmetrize(q.shape);
  // lambda = M^{-1} Sigma M^{-T} = shape^{-1}
  Lu lu = Lu::factor(sol.m_n);
  Matrix x = lu.solve(sol.sigma_n.mat());
  q.lambda = transpose(lu.solve(transpose(x)));
  symmetrize(q.lambda);
  q.threshold = chi2_quantile(static_cast<int>(n), alpha1) /
                static_cast<double>(sol.n_samples);
  return q;
}

CovMatrix lambda_hat(const SaaSolution& sol) {
  Lu lu = Lu::factor(sol.m_n);
  Matrix x = lu.solve(sol.sigma_n.mat());
  Matrix lam = transpose(lu.solve(transpose(x)));
  symmetrize(lam);
  return CovMatrix::from_matrix(std::move(lam));
}

namespace detail {

double face_min_quadratic(
    const ConfidenceRegion& q, const Cell& p_n, const BoxSet& s,
    const std::vector<std::pair<std::size_t, double>>& pins) {
  const std::size_t n = q.center.size();
  const Matrix& a = q.shape;

  // Work in s-coordinates: z' = center + s. Pins fix s; the remaining
  // coordinates carry the slab bounds of the n-cell p_n.
  Vector lo(n, -kInf), hi(n, kInf), sv(n, 0.0);
  std::vector<int8_t> state(n, 0);  // 0 free, 1 pinned, 2 at-lower, 3 at-upper
  for (std::size_t j = 0; j < n; ++j) {
    switch (p_n.pattern[j]) {
      case CoordCell::kInside:
        lo[j] = s.lower[j] - q.center[j];
        hi[j] = s.upper[j] - q.center[j];
        break;
      case CoordCell::kBelow:
        hi[j] = s.lower[j] - q.center[j];
        break;
      case CoordCell::kAbove:
        lo[j] = s.upper[j] - q.center[j];
        break;
      case CoordCell::kPinned:
        break;  // the cell component is the whole line
      default:
        throw Error("face_min_quadratic: p_n is not an n-cell");
    }
  }
  for (auto& [j, value] : pins) {
    sv[j] = value - q.center[j];
    state[j] = 1;
  }
  // The start point (pins set, everything else at z_N) is feasible: z_N is
  // interior to its own n-cell slabs.
  const double scale = 1.0 + norm_max(a) * (1.0 + dot(sv, sv));
  const std::size_t max_iter = 3 * n + 10;
  for (std::size_t it = 0; it < max_iter; ++it) {
    std::vector<std::size_t> free;
    for (std::size_t j = 0; j < n; ++j)
      if (state[j] == 0) free.push_back(j);
    const std::size_t nf = free.size();

    // Equality-constrained minimum over the free coordinates.
    Vector target = sv;
    if (nf > 0) {
      Vector rhs(nf, 0.0);
      Matrix aff(nf, nf);
      for (std::size_t r = 0; r < nf; ++r) {
        const double* arow = a.row(free[r]);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          if (state[j] != 0) acc += arow[j] * sv[j];
        rhs[r] = -acc;
        for (std::size_t c = 0; c < nf; ++c) aff(r, c) = arow[free[c]];
      }
      Vector sf = Cholesky::factor(aff).solve(rhs);
      for (std::size_t r = 0; r < nf; ++r) target[free[r]] = sf[r];
    }

    // Step toward the target, stopping at the first blocking bound.
    double step = 1.0;
    std::size_t blocker = n;
    int blocker_side = 0;
    for (std::size_t r = 0; r < nf; ++r) {
      const std::size_t j = free[r];
      const double d = target[j] - sv[j];
      if (d > 0.0 && target[j] > hi[j]) {
        double t = (hi[j] - sv[j]) / d;
        if (t < step) {
          step = t;
          blocker = j;
          blocker_side = 3;
        }
      } else if (d < 0.0 && target[j] < lo[j]) {
        double t = (lo[j] - sv[j]) / d;
        if (t < step) {
          step = t;
          blocker = j;
          blocker_side = 2;
        }
      }
    }
    double moved = 0.0;
    for (std::size_t r = 0; r < nf; ++r) {
      const std::size_t j = free[r];
      const double d = (target[j] - sv[j]) * step;
      sv[j] += d;
      moved = std::max(moved, std::abs(d));
    }
    if (blocker != n) {
      state[blocker] = static_cast<int8_t>(blocker_side);
      sv[blocker] = blocker_side == 2 ? lo[blocker] : hi[blocker];
      continue;
    }
    if (moved > 1e-14 * scale) continue;

    // Stationary on the working set: check bound multipliers.
    Vector grad = matvec(a, sv);  // gradient/2
    std::size_t release = n;
    double worst = 1e-10 * scale;
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] == 2 && grad[j] < -worst) {
        worst = -grad[j];
        release = j;
      } else if (state[j] == 3 && grad[j] > worst) {
        worst = grad[j];
        release = j;
      }
    }
    if (release == n) break;  // optimal
    state[release] = 0;
  }
  Vector av = matvec(a, sv);
  return dot(sv, av);
}

}  // namespace detail

Cell select_cell(const ConfidenceRegion& q, const Cell& p_n, const BoxSet& s) {
  const std::size_t n = q.center.size();
  if (p_n.dim() != n) throw Error("select_cell: p_n is not an n-cell");

  struct Candidate {
    std::size_t j;
    double value;
    CoordCell pinned;
    double sdist;  // standardized distance of z_N,j to the face
  };
  std::vector<Candidate> cands;
  for (std::size_t j = 0; j < n; ++j) {
    const double ext = q.extent(j);
    const double zj = q.center[j];
    auto consider = [&](double face, CoordCell pinned_label) {
      if (!std::isfinite(face)) return;
      if (std::abs(zj - face) > ext) return;
      double sd = q.lambda(j, j) > 0.0
                      ? std::abs(zj - face) / std::sqrt(q.lambda(j, j))
                      : kInf;
      // A coordinate can touch at most one face; keep the nearer one.
      for (auto& c : cands)
        if (c.j == j) {
          if (sd < c.sdist) c = Candidate{j, face, pinned_label, sd};
          return;
        }
      cands.push_back(Candidate{j, face, pinned_label, sd});
    };
    switch (p_n.pattern[j]) {
      case CoordCell::kInside:
        consider(s.lower[j], CoordCell::kAtLower);
        consider(s.upper[j], CoordCell::kAtUpper);
        break;
      case CoordCell::kBelow:
        consider(s.lower[j], CoordCell::kAtLower);
        break;
      case CoordCell::kAbove:
        consider(s.upper[j], CoordCell::kAtUpper);
        break;
      default:
        break;
    }
  }

  while (!cands.empty()) {
    std::vector<std::pair<std::size_t, double>> pins;
    pins.reserve(cands.size());
    for (const auto& c : cands) pins.emplace_back(c.j, c.value);
    const double qmin = detail::face_min_quadratic(q, p_n, s, pins);
    if (qmin <= q.threshold * (1.0 + 1e-9) + 1e-15) break;
    std::size_t drop = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
      if (cands[i].sdist > cands[drop].sdist) drop = i;
    cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(drop));
  }

  Cell c = p_n;
  c.anchor = q.center;
  for (const auto& cand : cands) {
    c.pattern[cand.j] = cand.pinned;
    c.anchor[cand.j] = cand.value;
  }
  for (std::size_t j = 0; j < n; ++j)
    if (c.pattern[j] == CoordCell::kPinned) c.anchor[j] = s.lower[j];
  return c;
}

namespace detail {

IntervalReport ci_z0_with(const SaaSolution& sol, const Cell& c,
                          const CovMatrix& lambda, double alpha1,
                          double alpha2) {
  const std::size_t n = sol.z_n.size();
  Vector a0(n);
  for (std::size_t j = 0; j < n; ++j)
    a0[j] = c.coord_is_1d(j) ? sol.z_n[j] : c.anchor[j];
  ObliqueProjector p = build_projector(c.par(), std::nullopt, lambda);
  const double sqrt_n = std::sqrt(static_cast<double>(sol.n_samples));

  IntervalReport r;
  r.target = Target::kZ0;
  r.center = a0 + p.apply(sol.z_n - a0);
  r.half_widths.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    r.half_widths[j] = delta_half_width(p, alpha2, j) / sqrt_n;
  r.selected = c.id();
  r.alpha1 = alpha1;
  r.alpha2 = alpha2;
  r.a0 = std::move(a0);
  return r;
}

IntervalReport ci_x0_with(const SaaSolution& sol, const Cell& c,
                          const BoxSet& s, const CovMatrix& lambda,
                          double alpha1, double alpha2) {
  const std::size_t n = sol.z_n.size();
  IntervalReport rz = ci_z0_with(sol, c, lambda, alpha1, alpha2);
  FaceProjection fp = face_projection_data(s, c);
  ObliqueProjector p = build_projector(c.par(), std::nullopt, lambda);
  const double sqrt_n = std::sqrt(static_cast<double>(sol.n_samples));

  IntervalReport r;
  r.target = Target::kX0;
  r.center = fp.apply(rz.center);
  r.half_widths.assign(n, 0.0);
  Vector row(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!fp.free[j]) continue;  // row of Pi_H . Pi_E is zero
    for (std::size_t k = 0; k < n; ++k) row[k] = p.matrix()(j, k);
    r.half_widths[j] = delta_general(lambda, row, alpha2) / sqrt_n;
  }
  r.selected = c.id();
  r.alpha1 = alpha1;
  r.alpha2 = alpha2;
  r.a0 = rz.a0;
  return r;
}

}  // namespace detail

IntervalReport ci_z0(const SaaSolution& sol, const Cell& c, double alpha1,
                     double alpha2) {
  return detail::ci_z0_with(sol, c, lambda_hat(sol), alpha1, alpha2);
}

IntervalReport ci_x0(const SaaSolution& sol, const Cell& c, const BoxSet& s,
                     double alpha1, double alpha2) {
  return detail::ci_x0_with(sol, c, s, lambda_hat(sol), alpha1, alpha2);
}

}  // namespace svici
