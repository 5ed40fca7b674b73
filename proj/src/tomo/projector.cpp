#include "xct/tomo/projector.hpp"

#include <cmath>
#include <stdexcept>

#include "xct/core/parallel.hpp"

namespace xct {
namespace {

constexpr int kAnglesPerBlock = 8;  // fixed reduction granularity (determinism)

struct RayLayout {
  double half_len;  // mm
  int n_samples;
  double step_mm;
};

RayLayout ray_layout(const ProjectorGeometry& g) {
  RayLayout r;
  r.step_mm = g.step_frac * g.pixel_size;
  if (r.step_mm <= 0.0) throw std::invalid_argument("projector: step must be positive");
  r.half_len = 0.5 * g.pixel_size * std::hypot(static_cast<double>(g.img_h),
                                               static_cast<double>(g.img_w));
  r.n_samples = static_cast<int>(std::ceil(2.0 * r.half_len / r.step_mm));
  return r;
}

void check_geom(const ProjectorGeometry& g) {
  if (g.img_h <= 0 || g.img_w <= 0) throw std::invalid_argument("projector: empty image dims");
  if (g.n_det < 1) throw std::invalid_argument("projector: n_det must be >= 1");
  if (g.pixel_size <= 0.0) throw std::invalid_argument("projector: pixel_size must be positive");
  if (g.angles.empty()) throw std::invalid_argument("projector: no angles");
}

// One ray, gather form: accumulates bilinear samples. Scatter form adds
// val*weight into the image instead. Shared traversal keeps the pair an
// exact transpose.
template <typename T, bool kScatter>
inline T trace_ray(const ProjectorGeometry& g, const RayLayout& rl, double cos_t, double sin_t,
                   double s_mm, const T* img, T* img_out, T scatter_val) {
  const double cx = 0.5 * (g.img_w - 1);
  const double cy = 0.5 * (g.img_h - 1);
  const double inv_px = 1.0 / g.pixel_size;
  const int w = g.img_w, h = g.img_h;

  double acc = 0.0;
  for (int j = 0; j < rl.n_samples; ++j) {
    const double tau = -rl.half_len + (j + 0.5) * rl.step_mm;
    const double xp = (s_mm * cos_t - tau * sin_t) * inv_px + cx;
    const double yp = (s_mm * sin_t + tau * cos_t) * inv_px + cy;
    const double fxp = std::floor(xp);
    const double fyp = std::floor(yp);
    const int ix = static_cast<int>(fxp);
    const int iy = static_cast<int>(fyp);
    if (ix < -1 || ix >= w || iy < -1 || iy >= h) continue;
    const double fx = xp - fxp;
    const double fy = yp - fyp;
    const double w00 = (1.0 - fx) * (1.0 - fy);
    const double w10 = fx * (1.0 - fy);
    const double w01 = (1.0 - fx) * fy;
    const double w11 = fx * fy;
    const bool x0 = ix >= 0, x1 = ix + 1 < w, y0 = iy >= 0, y1 = iy + 1 < h;
    if constexpr (kScatter) {
      if (x0 && y0) img_out[static_cast<std::size_t>(iy) * w + ix] += static_cast<T>(w00) * scatter_val;
      if (x1 && y0) img_out[static_cast<std::size_t>(iy) * w + ix + 1] += static_cast<T>(w10) * scatter_val;
      if (x0 && y1) img_out[static_cast<std::size_t>(iy + 1) * w + ix] += static_cast<T>(w01) * scatter_val;
      if (x1 && y1) img_out[static_cast<std::size_t>(iy + 1) * w + ix + 1] += static_cast<T>(w11) * scatter_val;
    } else {
      double v = 0.0;
      if (x0 && y0) v += w00 * static_cast<double>(img[static_cast<std::size_t>(iy) * w + ix]);
      if (x1 && y0) v += w10 * static_cast<double>(img[static_cast<std::size_t>(iy) * w + ix + 1]);
      if (x0 && y1) v += w01 * static_cast<double>(img[static_cast<std::size_t>(iy + 1) * w + ix]);
      if (x1 && y1) v += w11 * static_cast<double>(img[static_cast<std::size_t>(iy + 1) * w + ix + 1]);
      acc += v;
    }
  }
  return static_cast<T>(acc);
}

}  // namespace

int full_coverage_dets(int w) {
  return static_cast<int>(std::ceil(std::sqrt(2.0) * w)) + 1;
}

template <typename T>
Image<T> radon_forward(const Image<T>& img, const ProjectorGeometry& g) {
  check_geom(g);
  if (img.height() != g.img_h || img.width() != g.img_w)
    throw std::invalid_argument("radon_forward: image dims do not match geometry");
  const RayLayout rl = ray_layout(g);
  const int n_angles = static_cast<int>(g.angles.size());
  const double ds = g.spacing();
  Image<T> sino(n_angles, g.n_det);

  parallel_for(0, n_angles, [&](std::int64_t a0, std::int64_t a1) {
    for (std::int64_t a = a0; a < a1; ++a) {
      const double cos_t = std::cos(g.angles[a]);
      const double sin_t = std::sin(g.angles[a]);
      T* row = sino.row(static_cast<int>(a));
      for (int d = 0; d < g.n_det; ++d) {
        const double s = (d - 0.5 * (g.n_det - 1)) * ds;
        const T sum =
            trace_ray<T, false>(g, rl, cos_t, sin_t, s, img.data(), nullptr, T(0));
        row[d] = static_cast<T>(sum * static_cast<T>(rl.step_mm));
      }
    }
  });
  return sino;
}

template <typename T>
Image<T> radon_adjoint(const Image<T>& sino, const ProjectorGeometry& g) {
  check_geom(g);
  const int n_angles = static_cast<int>(g.angles.size());
  if (sino.height() != n_angles || sino.width() != g.n_det)
    throw std::invalid_argument("radon_adjoint: sinogram dims do not match geometry");
  const RayLayout rl = ray_layout(g);
  const double ds = g.spacing();

  // Fixed angle-block partials summed in block order: bit-reproducible
  // regardless of thread count.
  const int n_blocks = (n_angles + kAnglesPerBlock - 1) / kAnglesPerBlock;
  std::vector<Image<T>> partials(n_blocks);

  parallel_for(0, n_blocks, [&](std::int64_t b0, std::int64_t b1) {
    for (std::int64_t b = b0; b < b1; ++b) {
      Image<T> part(g.img_h, g.img_w);
      const int a_begin = static_cast<int>(b) * kAnglesPerBlock;
      const int a_end = std::min(n_angles, a_begin + kAnglesPerBlock);
      for (int a = a_begin; a < a_end; ++a) {
        const double cos_t = std::cos(g.angles[a]);
        const double sin_t = std::sin(g.angles[a]);
        const T* row = sino.row(a);
        for (int d = 0; d < g.n_det; ++d) {
          const double s = (d - 0.5 * (g.n_det - 1)) * ds;
          const T val = static_cast<T>(row[d] * static_cast<T>(rl.step_mm));
          trace_ray<T, true>(g, rl, cos_t, sin_t, s, nullptr, part.data(), val);
        }
      }
      partials[b] = std::move(part);
    }
  });

  Image<T> out(g.img_h, g.img_w);
  for (int b = 0; b < n_blocks; ++b) {
    const T* p = partials[b].data();
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += p[i];
  }
  return out;
}

template Image<float> radon_forward<float>(const Image<float>&, const ProjectorGeometry&);
template Image<double> radon_forward<double>(const Image<double>&, const ProjectorGeometry&);
template Image<float> radon_adjoint<float>(const Image<float>&, const ProjectorGeometry&);
template Image<double> radon_adjoint<double>(const Image<double>&, const ProjectorGeometry&);

}  // namespace xct
