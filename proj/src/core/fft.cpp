#include "xct/core/fft.hpp"

#include <cassert>
#include <cmath>

#include "xct/core/grid.hpp"

namespace xct {
namespace {

template <typename T>
void fft_impl(std::complex<T>* x, std::size_t n, bool inverse) {
  assert(is_pow2(static_cast<std::int64_t>(n)));
  if (n <= 1) return;

  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  // Twiddles computed per stage in double then cast: keeps float transforms
  // accurate enough for the 1e-6-level comparisons the tests make.
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u(x[i + k]);
        std::complex<double> v(x[i + k + len / 2]);
        v *= w;
        x[i + k] = std::complex<T>(static_cast<T>(u.real() + v.real()),
                                   static_cast<T>(u.imag() + v.imag()));
        x[i + k + len / 2] = std::complex<T>(static_cast<T>(u.real() - v.real()),
                                             static_cast<T>(u.imag() - v.imag()));
        w *= wlen;
      }
    }
  }

  if (inverse) {
    const T inv_n = static_cast<T>(1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x[i] *= inv_n;
  }
}

}  // namespace

void fft_pow2(std::complex<double>* x, std::size_t n, bool inverse) { fft_impl(x, n, inverse); }
void fft_pow2(std::complex<float>* x, std::size_t n, bool inverse) { fft_impl(x, n, inverse); }

}  // namespace xct
