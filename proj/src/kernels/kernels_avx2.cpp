// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; everything here is reached only after the runtime
// cpuid check in avx2_supported().

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace svici::kernels::detail {

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  }
  __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s2 = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void syr_upper_avx2(double* a, std::size_t lda, const double* v, double w,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wv = w * v[i];
    const __m256d vwv = _mm256_set1_pd(wv);
    double* row = a + i * lda;
    std::size_t j = i;
    for (; j + 4 <= n; j += 4) {
      __m256d r = _mm256_loadu_pd(row + j);
      r = _mm256_fmadd_pd(vwv, _mm256_loadu_pd(v + j), r);
      _mm256_storeu_pd(row + j, r);
    }
    for (; j < n; ++j) row[j] = std::fma(wv, v[j], row[j]);
  }
}

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

// 64x64 -> low 64 multiply by a constant, emulated with 32-bit products.
inline __m256i mullo64(__m256i x, std::uint64_t c) {
  const __m256i vc = _mm256_set1_epi64x(static_cast<long long>(c));
  const __m256i vc_hi = _mm256_srli_epi64(vc, 32);
  __m256i lo = _mm256_mul_epu32(x, vc);                        // x_lo * c_lo
  __m256i m1 = _mm256_mul_epu32(_mm256_srli_epi64(x, 32), vc); // x_hi * c_lo
  __m256i m2 = _mm256_mul_epu32(x, vc_hi);                     // x_lo * c_hi
  __m256i hi = _mm256_slli_epi64(_mm256_add_epi64(m1, m2), 32);
  return _mm256_add_epi64(lo, hi);
}

inline __m256i mix64_vec(__m256i z) {
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 30));
  z = mullo64(z, 0xBF58476D1CE4E5B9ull);
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 27));
  z = mullo64(z, 0x94D049BB133111EBull);
  z = _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
  return z;
}

inline std::uint64_t mix64_one(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

// (u64 >> 12) * 2^-52, exact: mask the 52-bit mantissa into [2^52, 2^53)
// and subtract the implicit 2^52.
inline __m256d u64_to_unit(__m256i x) {
  const __m256i mant = _mm256_srli_epi64(x, 12);
  const __m256i exp = _mm256_set1_epi64x(0x4330000000000000ll);  // 2^52
  __m256d d = _mm256_castsi256_pd(_mm256_or_si256(mant, exp));
  d = _mm256_sub_pd(d, _mm256_castsi256_pd(exp));
  return _mm256_mul_pd(d, _mm256_set1_pd(0x1.0p-52));
}

}  // namespace

void splitmix_fill_avx2(std::uint64_t key, std::uint64_t ctr0,
                        std::uint64_t* out, std::size_t n) {
  std::uint64_t base = key + ctr0 * kGamma;
  __m256i state = _mm256_set_epi64x(
      static_cast<long long>(base + 4 * kGamma),
      static_cast<long long>(base + 3 * kGamma),
      static_cast<long long>(base + 2 * kGamma),
      static_cast<long long>(base + 1 * kGamma));
  const __m256i step = _mm256_set1_epi64x(static_cast<long long>(4 * kGamma));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), mix64_vec(state));
    state = _mm256_add_epi64(state, step);
  }
  std::uint64_t s = base + i * kGamma;
  for (; i < n; ++i) {
    s += kGamma;
    out[i] = mix64_one(s);
  }
}

void uniform_fill_avx2(std::uint64_t key, std::uint64_t ctr0, double* out,
                       std::size_t n) {
  std::uint64_t base = key + ctr0 * kGamma;
  __m256i state = _mm256_set_epi64x(
      static_cast<long long>(base + 4 * kGamma),
      static_cast<long long>(base + 3 * kGamma),
      static_cast<long long>(base + 2 * kGamma),
      static_cast<long long>(base + 1 * kGamma));
  const __m256i step = _mm256_set1_epi64x(static_cast<long long>(4 * kGamma));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, u64_to_unit(mix64_vec(state)));
    state = _mm256_add_epi64(state, step);
  }
  std::uint64_t s = base + i * kGamma;
  for (; i < n; ++i) {
    s += kGamma;
    out[i] = static_cast<double>(mix64_one(s) >> 12) * 0x1.0p-52;
  }
}

}  // namespace svici::kernels::detail
