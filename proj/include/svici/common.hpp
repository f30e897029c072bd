#pragma once

#include <stdexcept>
#include <string>

namespace svici {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix required to be symmetric positive definite is not.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

/// A linear system or factorization hit a (numerically) singular matrix.
class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// A piece matrix of a piecewise linear map is singular, so the map cannot
/// be a homeomorphism.
class SingularPiece : public Error {
 public:
  using Error::Error;
};

/// A point sits on a subdivision boundary beyond tolerance, so no unique
/// piece can be identified. A probability-zero event; usually a modeling bug.
class AmbiguousPiece : public Error {
 public:
  using Error::Error;
};

/// The piecewise-linear solver failed to reach a stationary sign pattern.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// Lemke pivoting terminated on a ray without a complementary solution.
class RayTermination : public Error {
 public:
  using Error::Error;
};

/// A solution lies on a cell boundary, so its normal-map Jacobian is not
/// defined. Replications hitting this are recorded and skipped.
class DegenerateSolution : public Error {
 public:
  using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace svici
