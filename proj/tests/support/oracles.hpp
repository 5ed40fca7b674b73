#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "xct/core/grid.hpp"
#include "xct/metrics/metrics.hpp"
#include "xct/tomo/projector.hpp"

// Independent reference implementations the tests check the library against.
// Everything here is written for clarity (naive loops, O(n²) where that is
// the obvious form), never for speed, and shares no code with the library
// paths under test.
namespace xct::testing {

// Direct O(n²) discrete Fourier transform, same convention as the library
// (inverse divides by n).
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x,
                                            bool inverse);

// Dense matrix of the forward projector: rows = n_angles·n_det (angle-major),
// cols = img_h·img_w, built column-by-column from unit basis images.
Image<double> materialize_projector(const ProjectorGeometry& g);

// Anti-aliased disk of the given value on zero background; each pixel is the
// value times its covered-area fraction, estimated with supersample² samples.
Image<double> render_disk(int h, int w, double cx, double cy, double radius_px, double value,
                          int supersample);

// Line integral through a uniform disk of radius r (mm) at signed detector
// offset s (mm) from the center: value · 2·sqrt(r²−s²), zero outside.
double disk_chord(double radius_mm, double s_mm, double value);

// Direct nested-loop mean SSIM over fully-interior window positions with an
// explicitly normalized Gaussian window, all in double.
double ssim_reference(const Image<float>& x, const Image<float>& ref, double max_val,
                      const SsimConfig& cfg);

// Same, restricted to window centers strictly inside the inscribed circle,
// with window taps outside the circle dropped and weights renormalized.
double ssim_reference_masked(const Image<float>& x, const Image<float>& ref, double max_val,
                             const SsimConfig& cfg);

// Central finite difference d f / d x at x0.
inline double central_fd(const std::function<double(double)>& f, double x0, double h) {
  return (f(x0 + h) - f(x0 - h)) / (2.0 * h);
}

// Dense symmetric-positive-definite solve by Gaussian elimination with
// partial pivoting; a is n×n row-major, overwritten.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b, int n);

}  // namespace xct::testing
