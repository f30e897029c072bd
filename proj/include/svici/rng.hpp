#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "svici/kernels.hpp"

namespace svici {

/// Stream roles for seed derivation. Distinct roles never collide even for
/// the same (master seed, replication) pair.
enum class StreamRole : std::uint64_t {
  kSample = 1,
  kSolverPerturbation = 2,  // reserved
  kBootstrap = 3,
};

/// Counter-based random stream (SplitMix64). Value semantics: copying a
/// stream replays it, seek() gives random access, and the number of variates
/// consumed by any operation is deterministic (no rejection steps), so SAA
/// draws can be re-derived from (seed, draw index) instead of stored.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key, std::uint64_t start_counter = 0)
      : key_(key), ctr_(start_counter) {}

  /// Stream for (master seed, replication, role).
  static RngStream derive(std::uint64_t master, std::uint64_t replication,
                          StreamRole role) {
    std::uint64_t h = kernels::mix64(master ^ 0x5851F42D4C957F2Dull);
    h = kernels::mix64(h ^ (replication * 0x9E3779B97F4A7C15ull));
    h = kernels::mix64(h ^ (static_cast<std::uint64_t>(role) *
                            0xBF58476D1CE4E5B9ull));
    return RngStream(h);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return ctr_; }
  void seek(std::uint64_t counter) { ctr_ = counter; }

  std::uint64_t next_u64() { return kernels::splitmix_at(key_, ++ctr_); }

  /// Uniform double in [0,1), 52-bit resolution.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 12) * 0x1.0p-52;
  }

  /// Uniform double in [a,b).
  double next_uniform(double a, double b) {
    return a + (b - a) * next_uniform();
  }

  void fill_uniform(double* out, std::size_t n) {
    kernels::uniform_fill(key_, ctr_, out, n);
    ctr_ += n;
  }

  /// Box-Muller pair of independent standard normals. Consumes exactly two
  /// uniforms.
  void next_normal_pair(double& g0, double& g1) {
    double u1 = 1.0 - next_uniform();  // (0,1]
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    g0 = r * std::cos(t);
    g1 = r * std::sin(t);
  }

  /// Fills n standard normals, consuming 2*ceil(n/2) uniforms.
  void fill_normal(double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) next_normal_pair(out[i], out[i + 1]);
    if (i < n) {
      double a, b;
      next_normal_pair(a, b);
      out[i] = a;
    }
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

}  // namespace svici
