#pragma once

#include <cstddef>

namespace xct::kernels {

// Data-parallel primitives used by the hot paths (MLP training, CGLS, image
// arithmetic). Two implementations ship: a plain-scalar reference and an
// AVX2+FMA variant compiled in its own translation unit. `active()` picks one
// at runtime from CPU features; XCT_KERNEL_ISA=scalar|avx2 overrides.
//
// All matrices are dense row-major and contiguous.
//   gemm_nn: C[MxN] (+)= A[MxK]  * B[KxN]
//   gemm_nt: C[MxN] (+)= A[MxK]  * B[NxK]^T
//   gemm_tn: C[MxN] (+)= A[KxM]^T * B[KxN]
// accumulate=false overwrites C, true adds into it.
//
// The two implementations agree to reordering-of-sums rounding, not bitwise;
// tests pin the tolerance. Everything downstream that promises bitwise
// reproducibility promises it per selected implementation.
struct Table {
  const char* name;

  float (*sdot)(const float* a, const float* b, std::size_t n);
  void (*saxpy)(float alpha, const float* x, float* y, std::size_t n);
  void (*sscale)(float alpha, float* x, std::size_t n);
  void (*sgemm_nn)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                   float* c, bool accumulate);
  void (*sgemm_nt)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                   float* c, bool accumulate);
  void (*sgemm_tn)(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                   float* c, bool accumulate);

  double (*ddot)(const double* a, const double* b, std::size_t n);
  void (*daxpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*dscale)(double alpha, double* x, std::size_t n);
  void (*dgemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                   double* c, bool accumulate);
  void (*dgemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                   double* c, bool accumulate);
  void (*dgemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                   double* c, bool accumulate);
};

const Table& scalar_table();
// nullptr when the CPU lacks AVX2+FMA.
const Table* avx2_table();
// The runtime-selected table (cached after first call).
const Table& active();

// Typed convenience wrappers over active().

inline float dot(const float* a, const float* b, std::size_t n) { return active().sdot(a, b, n); }
inline double dot(const double* a, const double* b, std::size_t n) {
  return active().ddot(a, b, n);
}

inline void axpy(float alpha, const float* x, float* y, std::size_t n) {
  active().saxpy(alpha, x, y, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().daxpy(alpha, x, y, n);
}

inline void scale(float alpha, float* x, std::size_t n) { active().sscale(alpha, x, n); }
inline void scale(double alpha, double* x, std::size_t n) { active().dscale(alpha, x, n); }

inline void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                    float* c, bool accumulate = false) {
  active().sgemm_nn(m, n, k, a, b, c, accumulate);
}
inline void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c, bool accumulate = false) {
  active().dgemm_nn(m, n, k, a, b, c, accumulate);
}

inline void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                    float* c, bool accumulate = false) {
  active().sgemm_nt(m, n, k, a, b, c, accumulate);
}
inline void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c, bool accumulate = false) {
  active().dgemm_nt(m, n, k, a, b, c, accumulate);
}

inline void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                    float* c, bool accumulate = false) {
  active().sgemm_tn(m, n, k, a, b, c, accumulate);
}
inline void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c, bool accumulate = false) {
  active().dgemm_tn(m, n, k, a, b, c, accumulate);
}

}  // namespace xct::kernels
