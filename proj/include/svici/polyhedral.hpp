#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svici/gauss.hpp"
#include "svici/linalg.hpp"

namespace svici {

/// Box (or orthant) feasible set: per-coordinate bounds, +-inf allowed.
struct BoxSet {
  Vector lower, upper;

  static BoxSet orthant(std::size_t n);
  static BoxSet free_space(std::size_t n);
  static BoxSet bounds(Vector lo, Vector hi);

  std::size_t dim() const { return lower.size(); }
  /// Euclidean projection (per-coordinate clamp).
  Vector project(const Vector& z) const;
};

/// Position of a coordinate relative to the faces of its interval:
/// 1-dimensional cell components (Inside, Below, Above, Pinned) and
/// 0-dimensional ones (AtLower, AtUpper). For the orthant these read
/// Inside = PLUS, Below = MINUS, AtLower = ZERO.
enum class CoordCell : std::uint8_t {
  kInside,
  kBelow,
  kAbove,
  kAtLower,
  kAtUpper,
  kPinned,  // fixed coordinate (lower == upper); projection is constant
};

/// Sign-pattern cell of the normal manifold of a box.
struct Cell {
  std::vector<CoordCell> pattern;
  Vector anchor;

  std::size_t size() const { return pattern.size(); }
  /// Cell dimension: number of one-dimensional coordinates.
  std::size_t dim() const;
  bool coord_is_1d(std::size_t j) const;
  /// Par C: span of the unit vectors of one-dimensional coordinates.
  SubspaceBasis par() const;
  /// Compact id, e.g. "+-0" (orthant notation; '!'=Above, 'U'=AtUpper).
  std::string id() const;
};

/// The unique cell whose relative interior contains z; coordinates within
/// tau of a face value classify to the face (lower-dimensional cell).
Cell cell_of_point(const BoxSet& s, const Vector& z, double tau);

/// Default classification tolerance 1e-12 * (1 + |z|_inf).
double classify_tol(const Vector& z);

/// All n-cells having C as a face: each at-bound coordinate is replaced by
/// its two adjacent one-dimensional labels (2^z cells).
std::vector<Cell> n_cells_containing(const BoxSet& s, const Cell& c);

/// Per-coordinate component of a box-type cone (products of R, {0}, R+, R-).
enum class ConeCoord : std::uint8_t { kFull, kZero, kNonneg, kNonpos };

struct ConePattern {
  std::vector<ConeCoord> c;

  std::size_t size() const { return c.size(); }
  std::string id() const;  // '*','0','+','-'
  bool contains(const Vector& v, double tol) const;
  /// Euclidean projection onto the cone.
  Vector project(const Vector& v) const;
};

/// Critical cone K0 = T_S(x0) cap {z0-x0}^perp as a sign-pattern cone.
/// Requires x0 = Pi_S(z0) within tolerance.
ConePattern tangent_cone_K0(const BoxSet& s, const Vector& x0,
                            const Vector& z0);

/// Cone pattern generating the conical subdivision attached to a cell:
/// cone(P_i - z) over the n-cells P_i containing z in ri C. One-dimensional
/// coordinates become Full (Inside, derivative keeps the coordinate) or
/// Zero (Below/Above/Pinned, derivative drops it); at-bound coordinates
/// become the ambiguous half-line.
ConePattern cone_of_cell(const Cell& c);

/// One linear piece of a piecewise linear normal map.
struct Piece {
  std::uint64_t index = 0;
  ConePattern cone;                // full-dimensional: Full/Nonneg/Nonpos
  std::vector<std::uint8_t> dsel;  // diagonal of the projection selector
  Matrix m;                        // L*D + I - D
};

/// Normal map L^nor over a box-type cone K0: conical subdivision {K_i} with
/// one piece per n-cell of the normal manifold of K0, piece matrices
/// M_i = L*Pi_i + I - Pi_i. Pieces are enumerated lazily over the 2^z sign
/// completions of the ambiguous coordinates; above kMaxEnumerable ambiguous
/// coordinates only membership queries are available.
class PiecewiseLinearMap {
 public:
  static constexpr std::size_t kMaxEnumerable = 20;

  PiecewiseLinearMap(Matrix l, ConePattern k0);

  std::size_t dim() const { return base_.rows(); }
  const Matrix& base() const { return base_; }
  const ConePattern& base_cone() const { return k0_; }
  const std::vector<std::size_t>& ambiguous_coords() const {
    return ambiguous_;
  }
  bool enumerable() const { return ambiguous_.size() <= kMaxEnumerable; }
  std::uint64_t piece_count() const;

  /// Materializes piece `index` (bit b set = ambiguous coordinate b takes
  /// its non-cone side, selector 0). Throws SingularPiece if M_i is singular.
  Piece piece(std::uint64_t index) const;

  /// Index of the piece whose cone contains v strictly on the ambiguous
  /// coordinates. Throws AmbiguousPiece if v is within tol of a boundary.
  std::uint64_t piece_index_of(const Vector& v, double tol) const;

  /// E = common lineality space of all piece cones.
  SubspaceBasis lineality_space() const;

  /// Evaluates the map: L * Pi_K0(v) + v - Pi_K0(v).
  Vector apply(const Vector& v) const;

 private:
  Matrix base_;
  ConePattern k0_;
  std::vector<std::size_t> ambiguous_;
};

/// Builds the piecewise linear map and validates piece nonsingularity
/// (eagerly when there are at most 2^12 pieces, else on materialization).
PiecewiseLinearMap normal_map_pieces(const Matrix& l, const ConePattern& k0);

/// Face data for x-inference: F = C cap S, the affine projector onto aff F,
/// and H = Par F.
struct FaceProjection {
  Cell face;                       // F as a sign-pattern cell
  std::vector<std::uint8_t> free;  // 1 = identity coordinate of aff F
  Vector values;                   // pinned coordinate values
  SubspaceBasis h;                 // Par F

  Vector apply(const Vector& z) const;
};

FaceProjection face_projection_data(const BoxSet& s, const Cell& c);

}  // namespace svici
