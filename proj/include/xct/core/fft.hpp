#pragma once

#include <complex>
#include <vector>

namespace xct {

// In-place iterative radix-2 complex FFT. n must be a power of two (every
// grid in this project is, by construction). inverse=true applies the
// conjugate transform and divides by n, so ifft(fft(x)) == x up to rounding.
void fft_pow2(std::complex<double>* x, std::size_t n, bool inverse);
void fft_pow2(std::complex<float>* x, std::size_t n, bool inverse);

template <typename T>
void fft_pow2(std::vector<std::complex<T>>& x, bool inverse) {
  fft_pow2(x.data(), x.size(), inverse);
}

// 2D transform over a row-major h*w complex buffer (both dims powers of two):
// FFT of every row, then of every column.
template <typename T>
void fft2_pow2(std::complex<T>* x, int h, int w, bool inverse) {
  for (int y = 0; y < h; ++y) fft_pow2(x + static_cast<std::size_t>(y) * w, w, inverse);
  std::vector<std::complex<T>> col(h);
  for (int cx = 0; cx < w; ++cx) {
    for (int y = 0; y < h; ++y) col[y] = x[static_cast<std::size_t>(y) * w + cx];
    fft_pow2(col.data(), col.size(), inverse);
    for (int y = 0; y < h; ++y) x[static_cast<std::size_t>(y) * w + cx] = col[y];
  }
}

}  // namespace xct
