// AVX2+FMA kernel variants. This is the only translation unit compiled with
// -mavx2 -mfma; it must not be entered unless dispatch confirmed CPU support.

#include "xct/kernels/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cstring>

namespace xct::kernels {
namespace {

inline float hsum_ps(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  __m128 sh = _mm_movehdup_ps(lo);
  lo = _mm_add_ps(lo, sh);
  sh = _mm_movehl_ps(sh, lo);
  lo = _mm_add_ss(lo, sh);
  return _mm_cvtss_f32(lo);
}

inline double hsum_pd(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  lo = _mm_add_sd(lo, sh);
  return _mm_cvtsd_f64(lo);
}

// Transpose-reduce eight float accumulators into one vector of their sums.
inline __m256 hsum8_ps(__m256 v0, __m256 v1, __m256 v2, __m256 v3, __m256 v4, __m256 v5,
                       __m256 v6, __m256 v7) {
  __m256 s01 = _mm256_hadd_ps(v0, v1);
  __m256 s23 = _mm256_hadd_ps(v2, v3);
  __m256 s45 = _mm256_hadd_ps(v4, v5);
  __m256 s67 = _mm256_hadd_ps(v6, v7);
  __m256 s0123 = _mm256_hadd_ps(s01, s23);
  __m256 s4567 = _mm256_hadd_ps(s45, s67);
  __m256 lo = _mm256_permute2f128_ps(s0123, s4567, 0x20);
  __m256 hi = _mm256_permute2f128_ps(s0123, s4567, 0x31);
  return _mm256_add_ps(lo, hi);
}

float sdot_avx2(const float* a, const float* b, std::size_t n) {
  __m256 acc0 = _mm256_setzero_ps();
  __m256 acc1 = _mm256_setzero_ps();
  __m256 acc2 = _mm256_setzero_ps();
  __m256 acc3 = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
    acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 8), _mm256_loadu_ps(b + i + 8), acc1);
    acc2 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 16), _mm256_loadu_ps(b + i + 16), acc2);
    acc3 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i + 24), _mm256_loadu_ps(b + i + 24), acc3);
  }
  for (; i + 8 <= n; i += 8)
    acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc0);
  float s = hsum_ps(_mm256_add_ps(_mm256_add_ps(acc0, acc1), _mm256_add_ps(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double ddot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum_pd(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void saxpy_avx2(float alpha, const float* x, float* y, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
    _mm256_storeu_ps(y + i + 8,
                     _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i + 8), _mm256_loadu_ps(y + i + 8)));
  }
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void daxpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void sscale_avx2(float alpha, float* x, std::size_t n) {
  const __m256 av = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void dscale_avx2(double alpha, double* x, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

// ---- float GEMM ----

// nn/tn share a broadcast-FMA microkernel: 4 C rows x 16 C columns held in
// registers across the full k loop. `AStride`-generic row fetch is folded in
// by the caller via lambda-free pointers (kept simple: two near-identical
// bodies below).

void sgemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                   float* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 c00, c01, c10, c11, c20, c21, c30, c31;
      if (accumulate) {
        c00 = _mm256_loadu_ps(c + (i + 0) * n + j);
        c01 = _mm256_loadu_ps(c + (i + 0) * n + j + 8);
        c10 = _mm256_loadu_ps(c + (i + 1) * n + j);
        c11 = _mm256_loadu_ps(c + (i + 1) * n + j + 8);
        c20 = _mm256_loadu_ps(c + (i + 2) * n + j);
        c21 = _mm256_loadu_ps(c + (i + 2) * n + j + 8);
        c30 = _mm256_loadu_ps(c + (i + 3) * n + j);
        c31 = _mm256_loadu_ps(c + (i + 3) * n + j + 8);
      } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_ps();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256 b0 = _mm256_loadu_ps(b + p * n + j);
        const __m256 b1 = _mm256_loadu_ps(b + p * n + j + 8);
        __m256 av;
        av = _mm256_set1_ps(a[(i + 0) * k + p]);
        c00 = _mm256_fmadd_ps(av, b0, c00);
        c01 = _mm256_fmadd_ps(av, b1, c01);
        av = _mm256_set1_ps(a[(i + 1) * k + p]);
        c10 = _mm256_fmadd_ps(av, b0, c10);
        c11 = _mm256_fmadd_ps(av, b1, c11);
        av = _mm256_set1_ps(a[(i + 2) * k + p]);
        c20 = _mm256_fmadd_ps(av, b0, c20);
        c21 = _mm256_fmadd_ps(av, b1, c21);
        av = _mm256_set1_ps(a[(i + 3) * k + p]);
        c30 = _mm256_fmadd_ps(av, b0, c30);
        c31 = _mm256_fmadd_ps(av, b1, c31);
      }
      _mm256_storeu_ps(c + (i + 0) * n + j, c00);
      _mm256_storeu_ps(c + (i + 0) * n + j + 8, c01);
      _mm256_storeu_ps(c + (i + 1) * n + j, c10);
      _mm256_storeu_ps(c + (i + 1) * n + j + 8, c11);
      _mm256_storeu_ps(c + (i + 2) * n + j, c20);
      _mm256_storeu_ps(c + (i + 2) * n + j + 8, c21);
      _mm256_storeu_ps(c + (i + 3) * n + j, c30);
      _mm256_storeu_ps(c + (i + 3) * n + j + 8, c31);
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) {
        float acc = 0.0f;
        for (std::size_t p = 0; p < k; ++p) acc += a[(i + r) * k + p] * b[p * n + j];
        float* cc = c + (i + r) * n + j;
        *cc = accumulate ? *cc + acc : acc;
      }
    }
  }
  for (; i < m; ++i) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 c0, c1;
      if (accumulate) {
        c0 = _mm256_loadu_ps(c + i * n + j);
        c1 = _mm256_loadu_ps(c + i * n + j + 8);
      } else {
        c0 = c1 = _mm256_setzero_ps();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256 av = _mm256_set1_ps(a[i * k + p]);
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + p * n + j), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + p * n + j + 8), c1);
      }
      _mm256_storeu_ps(c + i * n + j, c0);
      _mm256_storeu_ps(c + i * n + j + 8, c1);
    }
    for (; j < n; ++j) {
      float acc = 0.0f;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      float* cc = c + i * n + j;
      *cc = accumulate ? *cc + acc : acc;
    }
  }
}

void sgemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                   float* c, bool accumulate) {
  // C[i][j] = sum_p A[p*m + i] * B[p*n + j]
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 c00, c01, c10, c11, c20, c21, c30, c31;
      if (accumulate) {
        c00 = _mm256_loadu_ps(c + (i + 0) * n + j);
        c01 = _mm256_loadu_ps(c + (i + 0) * n + j + 8);
        c10 = _mm256_loadu_ps(c + (i + 1) * n + j);
        c11 = _mm256_loadu_ps(c + (i + 1) * n + j + 8);
        c20 = _mm256_loadu_ps(c + (i + 2) * n + j);
        c21 = _mm256_loadu_ps(c + (i + 2) * n + j + 8);
        c30 = _mm256_loadu_ps(c + (i + 3) * n + j);
        c31 = _mm256_loadu_ps(c + (i + 3) * n + j + 8);
      } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_ps();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const float* ap = a + p * m + i;
        const __m256 b0 = _mm256_loadu_ps(b + p * n + j);
        const __m256 b1 = _mm256_loadu_ps(b + p * n + j + 8);
        __m256 av;
        av = _mm256_set1_ps(ap[0]);
        c00 = _mm256_fmadd_ps(av, b0, c00);
        c01 = _mm256_fmadd_ps(av, b1, c01);
        av = _mm256_set1_ps(ap[1]);
        c10 = _mm256_fmadd_ps(av, b0, c10);
        c11 = _mm256_fmadd_ps(av, b1, c11);
        av = _mm256_set1_ps(ap[2]);
        c20 = _mm256_fmadd_ps(av, b0, c20);
        c21 = _mm256_fmadd_ps(av, b1, c21);
        av = _mm256_set1_ps(ap[3]);
        c30 = _mm256_fmadd_ps(av, b0, c30);
        c31 = _mm256_fmadd_ps(av, b1, c31);
      }
      _mm256_storeu_ps(c + (i + 0) * n + j, c00);
      _mm256_storeu_ps(c + (i + 0) * n + j + 8, c01);
      _mm256_storeu_ps(c + (i + 1) * n + j, c10);
      _mm256_storeu_ps(c + (i + 1) * n + j + 8, c11);
      _mm256_storeu_ps(c + (i + 2) * n + j, c20);
      _mm256_storeu_ps(c + (i + 2) * n + j + 8, c21);
      _mm256_storeu_ps(c + (i + 3) * n + j, c30);
      _mm256_storeu_ps(c + (i + 3) * n + j + 8, c31);
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) {
        float acc = 0.0f;
        for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i + r] * b[p * n + j];
        float* cc = c + (i + r) * n + j;
        *cc = accumulate ? *cc + acc : acc;
      }
    }
  }
  for (; i < m; ++i) {
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) {
      __m256 c0, c1;
      if (accumulate) {
        c0 = _mm256_loadu_ps(c + i * n + j);
        c1 = _mm256_loadu_ps(c + i * n + j + 8);
      } else {
        c0 = c1 = _mm256_setzero_ps();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256 av = _mm256_set1_ps(a[p * m + i]);
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + p * n + j), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b + p * n + j + 8), c1);
      }
      _mm256_storeu_ps(c + i * n + j, c0);
      _mm256_storeu_ps(c + i * n + j + 8, c1);
    }
    for (; j < n; ++j) {
      float acc = 0.0f;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      float* cc = c + i * n + j;
      *cc = accumulate ? *cc + acc : acc;
    }
  }
}

void sgemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                   float* c, bool accumulate) {
  // C[i][j] = dot(A row i, B row j): contiguous k on both sides.
  const std::size_t k8 = k & ~std::size_t(7);
  for (std::size_t i = 0; i < m; ++i) {
    const float* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
      __m256 acc2 = _mm256_setzero_ps(), acc3 = _mm256_setzero_ps();
      __m256 acc4 = _mm256_setzero_ps(), acc5 = _mm256_setzero_ps();
      __m256 acc6 = _mm256_setzero_ps(), acc7 = _mm256_setzero_ps();
      const float* b0 = b + (j + 0) * k;
      const float* b1 = b + (j + 1) * k;
      const float* b2 = b + (j + 2) * k;
      const float* b3 = b + (j + 3) * k;
      const float* b4 = b + (j + 4) * k;
      const float* b5 = b + (j + 5) * k;
      const float* b6 = b + (j + 6) * k;
      const float* b7 = b + (j + 7) * k;
      for (std::size_t p = 0; p < k8; p += 8) {
        const __m256 av = _mm256_loadu_ps(arow + p);
        acc0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), acc0);
        acc1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), acc1);
        acc2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), acc2);
        acc3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), acc3);
        acc4 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b4 + p), acc4);
        acc5 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b5 + p), acc5);
        acc6 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b6 + p), acc6);
        acc7 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b7 + p), acc7);
      }
      __m256 sums = hsum8_ps(acc0, acc1, acc2, acc3, acc4, acc5, acc6, acc7);
      if (k8 != k) {
        alignas(32) float tail[8];
        const float* brows[8] = {b0, b1, b2, b3, b4, b5, b6, b7};
        for (int t = 0; t < 8; ++t) {
          float s = 0.0f;
          for (std::size_t p = k8; p < k; ++p) s += arow[p] * brows[t][p];
          tail[t] = s;
        }
        sums = _mm256_add_ps(sums, _mm256_load_ps(tail));
      }
      float* cc = c + i * n + j;
      if (accumulate) sums = _mm256_add_ps(sums, _mm256_loadu_ps(cc));
      _mm256_storeu_ps(cc, sums);
    }
    for (; j < n; ++j) {
      const float s = sdot_avx2(arow, b + j * k, k);
      float* cc = c + i * n + j;
      *cc = accumulate ? *cc + s : s;
    }
  }
}

// ---- double GEMM: same tiling at half vector width (4m x 8n). ----

void dgemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                   double* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00, c01, c10, c11, c20, c21, c30, c31;
      if (accumulate) {
        c00 = _mm256_loadu_pd(c + (i + 0) * n + j);
        c01 = _mm256_loadu_pd(c + (i + 0) * n + j + 4);
        c10 = _mm256_loadu_pd(c + (i + 1) * n + j);
        c11 = _mm256_loadu_pd(c + (i + 1) * n + j + 4);
        c20 = _mm256_loadu_pd(c + (i + 2) * n + j);
        c21 = _mm256_loadu_pd(c + (i + 2) * n + j + 4);
        c30 = _mm256_loadu_pd(c + (i + 3) * n + j);
        c31 = _mm256_loadu_pd(c + (i + 3) * n + j + 4);
      } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
        __m256d av;
        av = _mm256_set1_pd(a[(i + 0) * k + p]);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_set1_pd(a[(i + 1) * k + p]);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_set1_pd(a[(i + 2) * k + p]);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_set1_pd(a[(i + 3) * k + p]);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      _mm256_storeu_pd(c + (i + 0) * n + j, c00);
      _mm256_storeu_pd(c + (i + 0) * n + j + 4, c01);
      _mm256_storeu_pd(c + (i + 1) * n + j, c10);
      _mm256_storeu_pd(c + (i + 1) * n + j + 4, c11);
      _mm256_storeu_pd(c + (i + 2) * n + j, c20);
      _mm256_storeu_pd(c + (i + 2) * n + j + 4, c21);
      _mm256_storeu_pd(c + (i + 3) * n + j, c30);
      _mm256_storeu_pd(c + (i + 3) * n + j + 4, c31);
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a[(i + r) * k + p] * b[p * n + j];
        double* cc = c + (i + r) * n + j;
        *cc = accumulate ? *cc + acc : acc;
      }
    }
  }
  for (; i < m; ++i) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c0, c1;
      if (accumulate) {
        c0 = _mm256_loadu_pd(c + i * n + j);
        c1 = _mm256_loadu_pd(c + i * n + j + 4);
      } else {
        c0 = c1 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(a[i * k + p]);
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * n + j), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * n + j + 4), c1);
      }
      _mm256_storeu_pd(c + i * n + j, c0);
      _mm256_storeu_pd(c + i * n + j + 4, c1);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
      double* cc = c + i * n + j;
      *cc = accumulate ? *cc + acc : acc;
    }
  }
}

void dgemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                   double* c, bool accumulate) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c00, c01, c10, c11, c20, c21, c30, c31;
      if (accumulate) {
        c00 = _mm256_loadu_pd(c + (i + 0) * n + j);
        c01 = _mm256_loadu_pd(c + (i + 0) * n + j + 4);
        c10 = _mm256_loadu_pd(c + (i + 1) * n + j);
        c11 = _mm256_loadu_pd(c + (i + 1) * n + j + 4);
        c20 = _mm256_loadu_pd(c + (i + 2) * n + j);
        c21 = _mm256_loadu_pd(c + (i + 2) * n + j + 4);
        c30 = _mm256_loadu_pd(c + (i + 3) * n + j);
        c31 = _mm256_loadu_pd(c + (i + 3) * n + j + 4);
      } else {
        c00 = c01 = c10 = c11 = c20 = c21 = c30 = c31 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m + i;
        const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
        __m256d av;
        av = _mm256_set1_pd(ap[0]);
        c00 = _mm256_fmadd_pd(av, b0, c00);
        c01 = _mm256_fmadd_pd(av, b1, c01);
        av = _mm256_set1_pd(ap[1]);
        c10 = _mm256_fmadd_pd(av, b0, c10);
        c11 = _mm256_fmadd_pd(av, b1, c11);
        av = _mm256_set1_pd(ap[2]);
        c20 = _mm256_fmadd_pd(av, b0, c20);
        c21 = _mm256_fmadd_pd(av, b1, c21);
        av = _mm256_set1_pd(ap[3]);
        c30 = _mm256_fmadd_pd(av, b0, c30);
        c31 = _mm256_fmadd_pd(av, b1, c31);
      }
      _mm256_storeu_pd(c + (i + 0) * n + j, c00);
      _mm256_storeu_pd(c + (i + 0) * n + j + 4, c01);
      _mm256_storeu_pd(c + (i + 1) * n + j, c10);
      _mm256_storeu_pd(c + (i + 1) * n + j + 4, c11);
      _mm256_storeu_pd(c + (i + 2) * n + j, c20);
      _mm256_storeu_pd(c + (i + 2) * n + j + 4, c21);
      _mm256_storeu_pd(c + (i + 3) * n + j, c30);
      _mm256_storeu_pd(c + (i + 3) * n + j + 4, c31);
    }
    for (; j < n; ++j) {
      for (std::size_t r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i + r] * b[p * n + j];
        double* cc = c + (i + r) * n + j;
        *cc = accumulate ? *cc + acc : acc;
      }
    }
  }
  for (; i < m; ++i) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d c0, c1;
      if (accumulate) {
        c0 = _mm256_loadu_pd(c + i * n + j);
        c1 = _mm256_loadu_pd(c + i * n + j + 4);
      } else {
        c0 = c1 = _mm256_setzero_pd();
      }
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d av = _mm256_set1_pd(a[p * m + i]);
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * n + j), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b + p * n + j + 4), c1);
      }
      _mm256_storeu_pd(c + i * n + j, c0);
      _mm256_storeu_pd(c + i * n + j + 4, c1);
    }
    for (; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a[p * m + i] * b[p * n + j];
      double* cc = c + i * n + j;
      *cc = accumulate ? *cc + acc : acc;
    }
  }
}

void dgemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                   double* c, bool accumulate) {
  const std::size_t k4 = k & ~std::size_t(3);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
      __m256d acc2 = _mm256_setzero_pd(), acc3 = _mm256_setzero_pd();
      const double* b0 = b + (j + 0) * k;
      const double* b1 = b + (j + 1) * k;
      const double* b2 = b + (j + 2) * k;
      const double* b3 = b + (j + 3) * k;
      for (std::size_t p = 0; p < k4; p += 4) {
        const __m256d av = _mm256_loadu_pd(arow + p);
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), acc1);
        acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), acc2);
        acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), acc3);
      }
      // hadd(acc0,acc1) interleaves per 128-bit lane; combine lanes to get
      // [sum0, sum1, sum2, sum3].
      __m256d s01 = _mm256_hadd_pd(acc0, acc1);
      __m256d s23 = _mm256_hadd_pd(acc2, acc3);
      __m256d lo = _mm256_permute2f128_pd(s01, s23, 0x20);
      __m256d hi = _mm256_permute2f128_pd(s01, s23, 0x31);
      __m256d sums = _mm256_add_pd(lo, hi);
      if (k4 != k) {
        alignas(32) double tail[4];
        const double* brows[4] = {b0, b1, b2, b3};
        for (int t = 0; t < 4; ++t) {
          double s = 0.0;
          for (std::size_t p = k4; p < k; ++p) s += arow[p] * brows[t][p];
          tail[t] = s;
        }
        sums = _mm256_add_pd(sums, _mm256_load_pd(tail));
      }
      double* cc = c + i * n + j;
      if (accumulate) sums = _mm256_add_pd(sums, _mm256_loadu_pd(cc));
      _mm256_storeu_pd(cc, sums);
    }
    for (; j < n; ++j) {
      const double s = ddot_avx2(arow, b + j * k, k);
      double* cc = c + i * n + j;
      *cc = accumulate ? *cc + s : s;
    }
  }
}

}  // namespace

const Table* avx2_table() {
  static const Table t = {
      "avx2",          &sdot_avx2,      &saxpy_avx2,     &sscale_avx2,  &sgemm_nn_avx2,
      &sgemm_nt_avx2,  &sgemm_tn_avx2,  &ddot_avx2,      &daxpy_avx2,   &dscale_avx2,
      &dgemm_nn_avx2,  &dgemm_nt_avx2,  &dgemm_tn_avx2,
  };
  return &t;
}

}  // namespace xct::kernels

#else

namespace xct::kernels {
const Table* avx2_table() { return nullptr; }
}  // namespace xct::kernels

#endif
