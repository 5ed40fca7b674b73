#include "xct/inr/sampling.hpp"

#include <algorithm>
#include <stdexcept>

namespace xct {

template <typename T>
std::vector<T> jittered_grid(int h, int w, int s, Rng* rng) {
  if (s < 1) throw std::invalid_argument("jittered_grid: s must be >= 1");
  if (h < 1 || w < 1) throw std::invalid_argument("jittered_grid: empty grid");
  if (h % s != 0 || w % s != 0)
    throw std::invalid_argument("jittered_grid: s must divide both h and w");
  const int ch = h / s, cw = w / s;
  std::vector<T> out(static_cast<std::size_t>(ch) * cw * 2);
  const double half = 0.5 * s;
  std::size_t at = 0;
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      double py = (cy + 0.5) * s - 0.5;
      double px = (cx + 0.5) * s - 0.5;
      if (rng) {
        py += rng->uniform(-half, half);
        px += rng->uniform(-half, half);
      }
      const double uy = std::clamp(2.0 * (py + 0.5) / h - 1.0, -1.0, 1.0);
      const double ux = std::clamp(2.0 * (px + 0.5) / w - 1.0, -1.0, 1.0);
      out[at++] = static_cast<T>(ux);
      out[at++] = static_cast<T>(uy);
    }
  }
  return out;
}

template std::vector<float> jittered_grid<float>(int, int, int, Rng*);
template std::vector<double> jittered_grid<double>(int, int, int, Rng*);

}  // namespace xct
