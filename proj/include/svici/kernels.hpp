#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner-loop kernels with a scalar reference implementation
// and an AVX2 variant selected at runtime. Everything above this layer is
// portable C++; equivalence between variants is covered by tests.
//
// Contracts that hold for every backend:
//  - splitmix_fill / uniform_fill are bit-exact across backends.
//  - axpy and syr_upper use fused multiply-add per element (single rounding),
//    so they are bit-exact across backends as well.
//  - dot may reassociate the accumulation; backends agree to O(n*eps).

namespace svici::kernels {

/// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

/// y[i] += alpha * x[i]  (fused multiply-add per element)
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// Rank-1 symmetric accumulate on the upper triangle of a row-major matrix:
/// a[i*lda + j] += w * v[i] * v[j] for all 0 <= i <= j < n.
void syr_upper(double* a, std::size_t lda, const double* v, double w,
               std::size_t n);

/// Counter-based SplitMix64. Value at counter c (c >= 1) is
/// mix64(key + c * 0x9E3779B97F4A7C15). Fills out[k] with the values at
/// counters ctr0+1 .. ctr0+n.
void splitmix_fill(std::uint64_t key, std::uint64_t ctr0, std::uint64_t* out,
                   std::size_t n);

/// Same stream mapped to doubles in [0,1): (value >> 12) * 2^-52.
void uniform_fill(std::uint64_t key, std::uint64_t ctr0, double* out,
                  std::size_t n);

/// Single value of the counter-based stream at counter `ctr`.
std::uint64_t splitmix_at(std::uint64_t key, std::uint64_t ctr);

/// SplitMix64 finalizer; also used for seed derivation.
std::uint64_t mix64(std::uint64_t z);

/// Name of the backend in use: "avx2" or "scalar".
const char* active_backend();

/// Force a backend by name ("scalar", "avx2", "auto"). Returns false if the
/// requested backend is unavailable on this machine. Intended for tests;
/// the SVICI_KERNELS environment variable has the same effect.
bool select_backend(const char* name);

}  // namespace svici::kernels
