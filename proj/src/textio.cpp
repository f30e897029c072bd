#include "svici/textio.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace svici {

double parse_number(const std::string& token) {
  if (token == "inf" || token == "+inf")
    return std::numeric_limits<double>::infinity();
  if (token == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + token + "'");
  }
  if (pos != token.size()) throw ParseError("not a number: '" + token + "'");
  return v;
}

namespace {

// Pulls whitespace-separated tokens, stripping '#' comments.
class TokenStream {
 public:
  explicit TokenStream(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    while (true) {
      if (pos_ < tokens_.size()) {
        tok = tokens_[pos_++];
        return true;
      }
      std::string line;
      if (!std::getline(in_, line)) return false;
      ++line_no_;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      tokens_.clear();
      pos_ = 0;
      std::istringstream ls(line);
      std::string t;
      while (ls >> t) tokens_.push_back(t);
      new_line_ = true;
    }
  }

  /// Remaining tokens on the current line.
  std::vector<std::string> rest_of_line() {
    std::vector<std::string> out(tokens_.begin() +
                                     static_cast<std::ptrdiff_t>(pos_),
                                 tokens_.end());
    pos_ = tokens_.size();
    return out;
  }

  double number(const std::string& what) {
    std::string t;
    if (!next(t)) throw ParseError("unexpected end of input reading " + what);
    return parse_number(t);
  }

  std::size_t count(const std::string& what) {
    double v = number(what);
    if (v < 0 || v != std::floor(v))
      throw ParseError(what + " must be a nonnegative integer");
    return static_cast<std::size_t>(v);
  }

  int line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
  bool new_line_ = false;
};

}  // namespace

KeyFile KeyFile::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse(in, path);
}

KeyFile KeyFile::parse(std::istream& in, const std::string& origin) {
  KeyFile kf;
  kf.origin_ = origin;
  TokenStream ts(in);
  std::string tok;
  while (ts.next(tok)) {
    try {
      if (tok == "matrix" || tok == "banded") {
        const bool banded = tok == "banded";
        std::string name;
        if (!ts.next(name)) throw ParseError("matrix needs a name");
        if (banded) {
          std::size_t n = ts.count("band size");
          std::size_t kd = ts.count("bandwidth");
          Matrix m(n, n);
          for (std::size_t i = 0; i < n; ++i) {
            std::size_t j0 = i > kd ? i - kd : 0;
            std::size_t j1 = std::min(n, i + kd + 1);
            for (std::size_t j = j0; j < j1; ++j)
              m(i, j) = ts.number("band entry");
          }
          kf.matrices_[name] = std::move(m);
          kf.bandwidths_[name] = kd;
        } else {
          std::size_t r = ts.count("matrix rows");
          std::size_t c = ts.count("matrix cols");
          Matrix m(r, c);
          for (std::size_t k = 0; k < r * c; ++k)
            m.data()[k] = ts.number("matrix entry");
          kf.matrices_[name] = std::move(m);
        }
      } else if (tok == "vector") {
        std::string name;
        if (!ts.next(name)) throw ParseError("vector needs a name");
        std::size_t n = ts.count("vector length");
        Vector v(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = ts.number("vector entry");
        kf.vectors_[name] = std::move(v);
      } else {
        kf.kv_[tok].push_back(ts.rest_of_line());
      }
    } catch (const ParseError& e) {
      throw ParseError(origin + ":" + std::to_string(ts.line_no()) + ": " +
                       e.what());
    }
  }
  return kf;
}

bool KeyFile::has(const std::string& key) const { return kv_.count(key) > 0; }
bool KeyFile::has_matrix(const std::string& key) const {
  return matrices_.count(key) > 0;
}
bool KeyFile::has_vector(const std::string& key) const {
  return vectors_.count(key) > 0;
}

const std::vector<std::vector<std::string>>& KeyFile::entries(
    const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end())
    throw ParseError(origin_ + ": missing key '" + key + "'");
  return it->second;
}

std::string KeyFile::get_string(const std::string& key) const {
  const auto& e = entries(key);
  if (e.back().empty())
    throw ParseError(origin_ + ": key '" + key + "' has no value");
  return e.back()[0];
}

std::string KeyFile::get_string(const std::string& key,
                                const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double KeyFile::get_number(const std::string& key) const {
  return parse_number(get_string(key));
}

double KeyFile::get_number(const std::string& key, double fallback) const {
  return has(key) ? get_number(key) : fallback;
}

std::uint64_t KeyFile::get_u64(const std::string& key,
                               std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  return std::stoull(get_string(key));
}

const Matrix& KeyFile::matrix(const std::string& key) const {
  auto it = matrices_.find(key);
  if (it == matrices_.end())
    throw ParseError(origin_ + ": missing matrix '" + key + "'");
  return it->second;
}

const Vector& KeyFile::vec(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end())
    throw ParseError(origin_ + ": missing vector '" + key + "'");
  return it->second;
}

std::optional<std::size_t> KeyFile::declared_bandwidth(
    const std::string& key) const {
  auto it = bandwidths_.find(key);
  if (it == bandwidths_.end()) return std::nullopt;
  return it->second;
}

BoxSet parse_box_set(const KeyFile& kf, std::size_t dim) {
  std::string kind = kf.get_string("set", "orthant");
  if (kind == "orthant") return BoxSet::orthant(dim);
  if (kind == "free") return BoxSet::free_space(dim);
  if (kind == "box") {
    Vector lo = kf.has_vector("lower")
                    ? kf.vec("lower")
                    : Vector(dim, -std::numeric_limits<double>::infinity());
    Vector hi = kf.has_vector("upper")
                    ? kf.vec("upper")
                    : Vector(dim, std::numeric_limits<double>::infinity());
    if (lo.size() != dim || hi.size() != dim)
      throw ParseError("set box: bound vectors must have length 'dim'");
    return BoxSet::bounds(std::move(lo), std::move(hi));
  }
  throw ParseError("unknown set kind: " + kind);
}

}  // namespace svici
