#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "svici/linalg.hpp"
#include "svici/polyhedral.hpp"

namespace svici {

/// Line-oriented key/value file with typed matrix and vector blocks.
/// '#' starts a comment. Directives:
///   matrix NAME ROWS COLS   followed by ROWS*COLS numbers
///   banded NAME N KD        followed by the in-band entries row by row
///   vector NAME N           followed by N numbers
///   KEY value...            everything else; keys may repeat
/// Numbers may span lines; `inf`/`-inf` are accepted.
class KeyFile {
 public:
  static KeyFile load_file(const std::string& path);
  static KeyFile parse(std::istream& in, const std::string& origin = "input");

  bool has(const std::string& key) const;
  bool has_matrix(const std::string& key) const;
  bool has_vector(const std::string& key) const;

  /// All value token lists for a repeated key, in file order.
  const std::vector<std::vector<std::string>>& entries(
      const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_number(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  const Matrix& matrix(const std::string& key) const;
  const Vector& vec(const std::string& key) const;
  /// Declared half-bandwidth when the matrix came from a `banded` block.
  std::optional<std::size_t> declared_bandwidth(const std::string& key) const;

 private:
  std::string origin_;
  std::map<std::string, std::vector<std::vector<std::string>>> kv_;
  std::map<std::string, Matrix> matrices_;
  std::map<std::string, std::size_t> bandwidths_;
  std::map<std::string, Vector> vectors_;
};

double parse_number(const std::string& token);

/// Feasible-set block: `set orthant` / `set free` with `dim`, or `set box`
/// with `vector lower` / `vector upper`.
BoxSet parse_box_set(const KeyFile& kf, std::size_t dim);

}  // namespace svici
