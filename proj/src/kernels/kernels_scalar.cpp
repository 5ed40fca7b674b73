#include "xct/kernels/kernels.hpp"

#include <cstring>

// Reference implementations: straight loops, sequential accumulation order.
// Kept deliberately simple — these define the semantics the AVX2 variants are
// equivalence-tested against, and they are the fallback on non-AVX2 hosts.

namespace xct::kernels {
namespace {

template <typename T>
T dot_impl(const T* a, const T* b, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
void axpy_impl(T alpha, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale_impl(T alpha, T* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <typename T>
void gemm_nn_impl(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
                  bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(T));
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void gemm_nt_impl(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
                  bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

template <typename T>
void gemm_tn_impl(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
                  bool accumulate) {
  if (!accumulate) std::memset(c, 0, m * n * sizeof(T));
  for (std::size_t p = 0; p < k; ++p) {
    const T* arow = a + p * m;
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table t = {
      "scalar",
      &dot_impl<float>,
      &axpy_impl<float>,
      &scale_impl<float>,
      &gemm_nn_impl<float>,
      &gemm_nt_impl<float>,
      &gemm_tn_impl<float>,
      &dot_impl<double>,
      &axpy_impl<double>,
      &scale_impl<double>,
      &gemm_nn_impl<double>,
      &gemm_nt_impl<double>,
      &gemm_tn_impl<double>,
  };
  return t;
}

}  // namespace xct::kernels
