#include "svici/polyhedral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace svici {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

BoxSet BoxSet::orthant(std::size_t n) {
  return BoxSet{Vector(n, 0.0), Vector(n, kInf)};
}

BoxSet BoxSet::free_space(std::size_t n) {
  return BoxSet{Vector(n, -kInf), Vector(n, kInf)};
}

BoxSet BoxSet::bounds(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw Error("box: bound length mismatch");
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (!(lo[j] <= hi[j])) throw Error("box: lower > upper at coordinate " +
                                       std::to_string(j));
  return BoxSet{std::move(lo), std::move(hi)};
}

Vector BoxSet::project(const Vector& z) const {
  Vector x = z;
  for (std::size_t j = 0; j < x.size(); ++j)
    x[j] = std::min(std::max(x[j], lower[j]), upper[j]);
  return x;
}

std::size_t Cell::dim() const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < pattern.size(); ++j) d += coord_is_1d(j);
  return d;
}

bool Cell::coord_is_1d(std::size_t j) const {
  switch (pattern[j]) {
    case CoordCell::kInside:
    case CoordCell::kBelow:
    case CoordCell::kAbove:
    case CoordCell::kPinned:
      return true;
    default:
      return false;
  }
}

SubspaceBasis Cell::par() const {
  std::vector<std::size_t> coords;
  for (std::size_t j = 0; j < pattern.size(); ++j)
    if (coord_is_1d(j)) coords.push_back(j);
  return SubspaceBasis::axis_aligned(pattern.size(), coords);
}

std::string Cell::id() const {
  std::string s;
  s.reserve(pattern.size());
  for (CoordCell p : pattern) {
    switch (p) {
      case CoordCell::kInside: s += '+'; break;
      case CoordCell::kBelow: s += '-'; break;
      case CoordCell::kAbove: s += '!'; break;
      case CoordCell::kAtLower: s += '0'; break;
      case CoordCell::kAtUpper: s += 'U'; break;
      case CoordCell::kPinned: s += '='; break;
    }
  }
  return s;
}

double classify_tol(const Vector& z) { return 1e-12 * (1.0 + norm_inf(z)); }

Cell cell_of_point(const BoxSet& s, const Vector& z, double tau) {
  if (z.size() != s.dim()) throw Error("cell_of_point: dimension mismatch");
  if (tau < 0.0) throw Error("cell_of_point: negative tolerance");
  Cell c;
  c.pattern.resize(z.size());
  c.anchor = z;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double lo = s.lower[j], hi = s.upper[j], v = z[j];
    if (lo == hi) {
      c.pattern[j] = CoordCell::kPinned;
      continue;
    }
    if (std::isfinite(lo) && v < lo - tau) {
      c.pattern[j] = CoordCell::kBelow;
    } else if (std::isfinite(lo) && v <= lo + tau) {
      c.pattern[j] = CoordCell::kAtLower;
      c.anchor[j] = lo;
    } else if (std::isfinite(hi) && v > hi + tau) {
      c.pattern[j] = CoordCell::kAbove;
    } else if (std::isfinite(hi) && v >= hi - tau) {
      c.pattern[j] = CoordCell::kAtUpper;
      c.anchor[j] = hi;
    } else {
      c.pattern[j] = CoordCell::kInside;
    }
  }
  return c;
}

std::vector<Cell> n_cells_containing(const BoxSet& s, const Cell& c) {
  std::vector<std::size_t> at;
  for (std::size_t j = 0; j < c.size(); ++j)
    if (!c.coord_is_1d(j)) at.push_back(j);
  if (at.size() > 20)
    throw Error("n_cells_containing: too many at-bound coordinates (" +
                std::to_string(at.size()) + ") to enumerate");
  const std::uint64_t count = 1ull << at.size();
  std::vector<Cell> out;
  out.reserve(count);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    Cell cc = c;
    for (std::size_t b = 0; b < at.size(); ++b) {
      const std::size_t j = at[b];
      const bool alt = (mask >> b) & 1u;
      if (c.pattern[j] == CoordCell::kAtLower)
        cc.pattern[j] = alt ? CoordCell::kBelow : CoordCell::kInside;
      else
        cc.pattern[j] = alt ? CoordCell::kAbove : CoordCell::kInside;
      // anchor stays on the shared face, which both n-cells contain
    }
    out.push_back(std::move(cc));
  }
  return out;
}

std::string ConePattern::id() const {
  std::string s;
  s.reserve(c.size());
  for (ConeCoord k : c) {
    switch (k) {
      case ConeCoord::kFull: s += '*'; break;
      case ConeCoord::kZero: s += '0'; break;
      case ConeCoord::kNonneg: s += '+'; break;
      case ConeCoord::kNonpos: s += '-'; break;
    }
  }
  return s;
}

bool ConePattern::contains(const Vector& v, double tol) const {
  for (std::size_t j = 0; j < c.size(); ++j) {
    switch (c[j]) {
      case ConeCoord::kFull: break;
      case ConeCoord::kZero:
        if (std::abs(v[j]) > tol) return false;
        break;
      case ConeCoord::kNonneg:
        if (v[j] < -tol) return false;
        break;
      case ConeCoord::kNonpos:
        if (v[j] > tol) return false;
        break;
    }
  }
  return true;
}

Vector ConePattern::project(const Vector& v) const {
  Vector x = v;
  for (std::size_t j = 0; j < c.size(); ++j) {
    switch (c[j]) {
      case ConeCoord::kFull: break;
      case ConeCoord::kZero: x[j] = 0.0; break;
      case ConeCoord::kNonneg: x[j] = std::max(x[j], 0.0); break;
      case ConeCoord::kNonpos: x[j] = std::min(x[j], 0.0); break;
    }
  }
  return x;
}

ConePattern tangent_cone_K0(const BoxSet& s, const Vector& x0,
                            const Vector& z0) {
  const std::size_t n = s.dim();
  if (x0.size() != n || z0.size() != n)
    throw Error("tangent_cone_K0: dimension mismatch");
  const double tol = classify_tol(z0);
  Vector proj = s.project(z0);
  for (std::size_t j = 0; j < n; ++j)
    if (std::abs(proj[j] - x0[j]) > tol)
      throw Error("tangent_cone_K0: x0 is not the projection of z0");
  ConePattern k;
  k.c.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = s.lower[j], hi = s.upper[j];
    const double v = z0[j] - x0[j];
    if (lo == hi) {
      k.c[j] = ConeCoord::kZero;
    } else if (std::isfinite(lo) && std::abs(x0[j] - lo) <= tol) {
      k.c[j] = std::abs(v) <= tol ? ConeCoord::kNonneg : ConeCoord::kZero;
    } else if (std::isfinite(hi) && std::abs(x0[j] - hi) <= tol) {
      k.c[j] = std::abs(v) <= tol ? ConeCoord::kNonpos : ConeCoord::kZero;
    } else {
      k.c[j] = ConeCoord::kFull;
    }
  }
  return k;
}

ConePattern cone_of_cell(const Cell& c) {
  ConePattern k;
  k.c.resize(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    switch (c.pattern[j]) {
      case CoordCell::kInside: k.c[j] = ConeCoord::kFull; break;
      case CoordCell::kBelow:
      case CoordCell::kAbove:
      case CoordCell::kPinned: k.c[j] = ConeCoord::kZero; break;
      case CoordCell::kAtLower: k.c[j] = ConeCoord::kNonneg; break;
      case CoordCell::kAtUpper: k.c[j] = ConeCoord::kNonpos; break;
    }
  }
  return k;
}

PiecewiseLinearMap::PiecewiseLinearMap(Matrix l, ConePattern k0)
    : base_(std::move(l)), k0_(std::move(k0)) {
  if (base_.rows() != base_.cols() || base_.rows() != k0_.size())
    throw Error("piecewise map: shape mismatch");
  for (std::size_t j = 0; j < k0_.size(); ++j)
    if (k0_.c[j] == ConeCoord::kNonneg || k0_.c[j] == ConeCoord::kNonpos)
      ambiguous_.push_back(j);
}

std::uint64_t PiecewiseLinearMap::piece_count() const {
  if (ambiguous_.size() > 62)
    throw Error("piecewise map: piece count overflows");
  return 1ull << ambiguous_.size();
}

Piece PiecewiseLinearMap::piece(std::uint64_t index) const {
  const std::size_t n = dim();
  Piece p;
  p.index = index;
  p.cone.c.resize(n);
  p.dsel.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    switch (k0_.c[j]) {
      case ConeCoord::kFull:
        p.cone.c[j] = ConeCoord::kFull;
        p.dsel[j] = 1;
        break;
      case ConeCoord::kZero:
        p.cone.c[j] = ConeCoord::kFull;
        p.dsel[j] = 0;
        break;
      default:
        break;  // filled below
    }
  }
  for (std::size_t b = 0; b < ambiguous_.size(); ++b) {
    const std::size_t j = ambiguous_[b];
    const bool other = (index >> b) & 1u;
    const bool nonneg = k0_.c[j] == ConeCoord::kNonneg;
    if (!other) {
      p.cone.c[j] = nonneg ? ConeCoord::kNonneg : ConeCoord::kNonpos;
      p.dsel[j] = 1;
    } else {
      p.cone.c[j] = nonneg ? ConeCoord::kNonpos : ConeCoord::kNonneg;
      p.dsel[j] = 0;
    }
  }
  // M = L*D + I - D: column j is L's column (selected) or e_j.
  p.m = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      p.m(i, j) = p.dsel[j] ? base_(i, j) : (i == j ? 1.0 : 0.0);
  try {
    Lu::factor(p.m);
  } catch (const SingularMatrix&) {
    throw SingularPiece("piece " + std::to_string(index) +
                        " has a singular matrix; the map is not a "
                        "homeomorphism");
  }
  return p;
}

std::uint64_t PiecewiseLinearMap::piece_index_of(const Vector& v,
                                                 double tol) const {
  std::uint64_t idx = 0;
  for (std::size_t b = 0; b < ambiguous_.size(); ++b) {
    const std::size_t j = ambiguous_[b];
    if (std::abs(v[j]) <= tol)
      throw AmbiguousPiece("point lies on a subdivision boundary at "
                           "coordinate " + std::to_string(j));
    const bool positive = v[j] > 0.0;
    const bool nonneg = k0_.c[j] == ConeCoord::kNonneg;
    if (positive != nonneg) idx |= 1ull << b;
  }
  return idx;
}

SubspaceBasis PiecewiseLinearMap::lineality_space() const {
  std::vector<std::size_t> coords;
  for (std::size_t j = 0; j < k0_.size(); ++j)
    if (k0_.c[j] == ConeCoord::kFull || k0_.c[j] == ConeCoord::kZero)
      coords.push_back(j);
  return SubspaceBasis::axis_aligned(dim(), coords);
}

Vector PiecewiseLinearMap::apply(const Vector& v) const {
  Vector pv = k0_.project(v);
  Vector y = matvec(base_, pv);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += v[j] - pv[j];
  return y;
}

PiecewiseLinearMap normal_map_pieces(const Matrix& l, const ConePattern& k0) {
  PiecewiseLinearMap map(l, k0);
  if (map.ambiguous_coords().size() <= 12) {
    const std::uint64_t count = map.piece_count();
    for (std::uint64_t i = 0; i < count; ++i) map.piece(i);  // validates
  }
  return map;
}

Vector FaceProjection::apply(const Vector& z) const {
  Vector x(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    x[j] = free[j] ? z[j] : values[j];
  return x;
}

FaceProjection face_projection_data(const BoxSet& s, const Cell& c) {
  const std::size_t n = c.size();
  if (s.dim() != n) throw Error("face_projection_data: dimension mismatch");
  FaceProjection f;
  f.free.assign(n, 0);
  f.values.assign(n, 0.0);
  f.face.pattern.resize(n);
  f.face.anchor.resize(n);
  std::vector<std::size_t> coords;
  for (std::size_t j = 0; j < n; ++j) {
    switch (c.pattern[j]) {
      case CoordCell::kInside:
        f.free[j] = 1;
        f.face.pattern[j] = CoordCell::kInside;
        f.face.anchor[j] = c.anchor[j];
        coords.push_back(j);
        break;
      case CoordCell::kBelow:
      case CoordCell::kAtLower:
      case CoordCell::kPinned:
        f.values[j] = s.lower[j];
        f.face.pattern[j] = CoordCell::kAtLower;
        f.face.anchor[j] = s.lower[j];
        break;
      case CoordCell::kAbove:
      case CoordCell::kAtUpper:
        f.values[j] = s.upper[j];
        f.face.pattern[j] = CoordCell::kAtUpper;
        f.face.anchor[j] = s.upper[j];
        break;
    }
  }
  f.h = SubspaceBasis::axis_aligned(n, coords);
  return f;
}

}  // namespace svici
