// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "lowrank/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace lowrank::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four columns of the upper triangle per pass so each load of column j is
// reused four times.
void gram_upper_avx2(const double* c, std::size_t rows, std::size_t cols,
                     std::size_t ld, double* out) {
  for (std::size_t j = 0; j < cols; ++j) {
    const double* cj = c + j * ld;
    std::size_t i = 0;
    for (; i + 4 <= j + 1; i += 4) {
      const double* c0 = c + i * ld;
      const double* c1 = c0 + ld;
      const double* c2 = c1 + ld;
      const double* c3 = c2 + ld;
      __m256d s0 = _mm256_setzero_pd();
      __m256d s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd();
      __m256d s3 = _mm256_setzero_pd();
      std::size_t k = 0;
      for (; k + 4 <= rows; k += 4) {
        const __m256d vj = _mm256_loadu_pd(cj + k);
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(c0 + k), vj, s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(c1 + k), vj, s1);
        s2 = _mm256_fmadd_pd(_mm256_loadu_pd(c2 + k), vj, s2);
        s3 = _mm256_fmadd_pd(_mm256_loadu_pd(c3 + k), vj, s3);
      }
      double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
      for (; k < rows; ++k) {
        t0 += c0[k] * cj[k];
        t1 += c1[k] * cj[k];
        t2 += c2[k] * cj[k];
        t3 += c3[k] * cj[k];
      }
      out[i + j * cols] = t0;
      out[i + 1 + j * cols] = t1;
      out[i + 2 + j * cols] = t2;
      out[i + 3 + j * cols] = t3;
    }
    for (; i <= j; ++i) out[i + j * cols] = dot_avx2(c + i * ld, cj, rows);
  }
}

bool cpu_has_avx2_fma() noexcept {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

}  // namespace

const Kernels* avx2_kernels() noexcept {
  static const Kernels k{Isa::kAvx2, dot_avx2, sum_squares_avx2, squared_distance_avx2,
                         axpy_avx2, gram_upper_avx2};
  static const bool supported = cpu_has_avx2_fma();
  return supported ? &k : nullptr;
}

}  // namespace lowrank::simd

#else

namespace lowrank::simd {
const Kernels* avx2_kernels() noexcept { return nullptr; }
}  // namespace lowrank::simd

#endif
