#include "xct/inr/tv.hpp"

#include <cmath>
#include <stdexcept>

namespace xct {

template <typename T>
double tv_spatial(const T* img, int h, int w, double eps, T* grad) {
  if (h < 2 || w < 2) throw std::invalid_argument("tv_spatial: image must be at least 2x2");
  if (!(eps > 0.0)) throw std::invalid_argument("tv_spatial: eps must be > 0");
  const double inv_n = 1.0 / (static_cast<double>(h) * w);
  double loss = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t at = static_cast<std::size_t>(y) * w + x;
      if (x + 1 < w) {
        const double d = static_cast<double>(img[at + 1]) - static_cast<double>(img[at]);
        const double r = std::sqrt(d * d + eps * eps);
        loss += r - eps;
        if (grad) {
          const T g = static_cast<T>(d / r * inv_n);
          grad[at + 1] += g;
          grad[at] -= g;
        }
      }
      if (y + 1 < h) {
        const double d = static_cast<double>(img[at + static_cast<std::size_t>(w)]) -
                         static_cast<double>(img[at]);
        const double r = std::sqrt(d * d + eps * eps);
        loss += r - eps;
        if (grad) {
          const T g = static_cast<T>(d / r * inv_n);
          grad[at + static_cast<std::size_t>(w)] += g;
          grad[at] -= g;
        }
      }
    }
  }
  return loss * inv_n;
}

template <typename T>
double charbonnier_pair(const T* a, const T* b, std::size_t n, double eps, T* grad_a,
                        T* grad_b) {
  if (n == 0) throw std::invalid_argument("charbonnier_pair: empty input");
  if (!(eps > 0.0)) throw std::invalid_argument("charbonnier_pair: eps must be > 0");
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    const double r = std::sqrt(d * d + eps * eps);
    loss += r - eps;
    const double g = d / r * inv_n;
    if (grad_a) grad_a[i] += static_cast<T>(g);
    if (grad_b) grad_b[i] -= static_cast<T>(g);
  }
  return loss * inv_n;
}

template double tv_spatial<float>(const float*, int, int, double, float*);
template double tv_spatial<double>(const double*, int, int, double, double*);
template double charbonnier_pair<float>(const float*, const float*, std::size_t, double, float*,
                                        float*);
template double charbonnier_pair<double>(const double*, const double*, std::size_t, double,
                                         double*, double*);

}  // namespace xct
