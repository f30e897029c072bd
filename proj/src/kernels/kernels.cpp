#include "svici/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace svici::kernels {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
}

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

std::uint64_t splitmix_at(std::uint64_t key, std::uint64_t ctr) {
  return mix64(key + ctr * kGamma);
}

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 = std::fma(a[i + 0], b[i + 0], s0);
    s1 = std::fma(a[i + 1], b[i + 1], s1);
    s2 = std::fma(a[i + 2], b[i + 2], s2);
    s3 = std::fma(a[i + 3], b[i + 3], s3);
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void syr_upper_scalar(double* a, std::size_t lda, const double* v, double w,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double wv = w * v[i];
    double* row = a + i * lda;
    for (std::size_t j = i; j < n; ++j) row[j] = std::fma(wv, v[j], row[j]);
  }
}

void splitmix_fill_scalar(std::uint64_t key, std::uint64_t ctr0,
                          std::uint64_t* out, std::size_t n) {
  std::uint64_t s = key + ctr0 * kGamma;
  for (std::size_t i = 0; i < n; ++i) {
    s += kGamma;
    out[i] = mix64(s);
  }
}

void uniform_fill_scalar(std::uint64_t key, std::uint64_t ctr0, double* out,
                         std::size_t n) {
  std::uint64_t s = key + ctr0 * kGamma;
  for (std::size_t i = 0; i < n; ++i) {
    s += kGamma;
    out[i] = static_cast<double>(mix64(s) >> 12) * 0x1.0p-52;
  }
}

#if SVICI_HAVE_AVX2
bool avx2_supported();
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void syr_upper_avx2(double* a, std::size_t lda, const double* v, double w,
                    std::size_t n);
void splitmix_fill_avx2(std::uint64_t key, std::uint64_t ctr0,
                        std::uint64_t* out, std::size_t n);
void uniform_fill_avx2(std::uint64_t key, std::uint64_t ctr0, double* out,
                       std::size_t n);
#endif

struct Backend {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*syr_upper)(double*, std::size_t, const double*, double, std::size_t);
  void (*splitmix_fill)(std::uint64_t, std::uint64_t, std::uint64_t*,
                        std::size_t);
  void (*uniform_fill)(std::uint64_t, std::uint64_t, double*, std::size_t);
};

const Backend kScalar = {"scalar",       dot_scalar,
                         axpy_scalar,    syr_upper_scalar,
                         splitmix_fill_scalar, uniform_fill_scalar};

#if SVICI_HAVE_AVX2
const Backend kAvx2 = {"avx2",       dot_avx2,
                       axpy_avx2,    syr_upper_avx2,
                       splitmix_fill_avx2, uniform_fill_avx2};
#endif

const Backend* pick_auto() {
#if SVICI_HAVE_AVX2
  if (avx2_supported()) return &kAvx2;
#endif
  return &kScalar;
}

const Backend* g_backend = nullptr;

const Backend& backend() {
  if (!g_backend) {
    const char* env = std::getenv("SVICI_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) {
      g_backend = &kScalar;
    } else {
#if SVICI_HAVE_AVX2
      if (env && std::strcmp(env, "avx2") == 0 && avx2_supported()) {
        g_backend = &kAvx2;
      } else
#endif
      {
        g_backend = pick_auto();
      }
    }
  }
  return *g_backend;
}

}  // namespace detail

double dot(const double* a, const double* b, std::size_t n) {
  return detail::backend().dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  detail::backend().axpy(alpha, x, y, n);
}

void syr_upper(double* a, std::size_t lda, const double* v, double w,
               std::size_t n) {
  detail::backend().syr_upper(a, lda, v, w, n);
}

void splitmix_fill(std::uint64_t key, std::uint64_t ctr0, std::uint64_t* out,
                   std::size_t n) {
  detail::backend().splitmix_fill(key, ctr0, out, n);
}

void uniform_fill(std::uint64_t key, std::uint64_t ctr0, double* out,
                  std::size_t n) {
  detail::backend().uniform_fill(key, ctr0, out, n);
}

const char* active_backend() { return detail::backend().name; }

bool select_backend(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    detail::g_backend = &detail::kScalar;
    return true;
  }
  if (std::strcmp(name, "auto") == 0) {
    detail::g_backend = detail::pick_auto();
    return true;
  }
#if SVICI_HAVE_AVX2
  if (std::strcmp(name, "avx2") == 0 && detail::avx2_supported()) {
    detail::g_backend = &detail::kAvx2;
    return true;
  }
#endif
  return false;
}

}  // namespace svici::kernels
