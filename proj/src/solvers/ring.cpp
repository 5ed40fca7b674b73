#include "xct/solvers/ring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace xct {

namespace {

double median_inplace(std::vector<double>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (n % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (lo + m);
  }
  return m;
}

}  // namespace

std::vector<double> tikhonov_smooth_1d(const std::vector<double>& in, double lambda) {
  const std::size_t n = in.size();
  if (lambda <= 0.0 || n < 2) return in;
  // Tridiagonal system: diag 1 + lambda·deg (deg 1 at ends, 2 interior),
  // off-diagonals −lambda.
  std::vector<double> diag(n), rhs = in, cp(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double deg = (i == 0 || i + 1 == n) ? 1.0 : 2.0;
    diag[i] = 1.0 + lambda * deg;
  }
  const double off = -lambda;
  cp[0] = off / diag[0];
  rhs[0] /= diag[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double m = diag[i] - off * cp[i - 1];
    cp[i] = off / m;
    rhs[i] = (rhs[i] - off * rhs[i - 1]) / m;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
  return rhs;
}

std::vector<double> estimate_ring_bias(const Image<double>& residuals,
                                       const RingEstimatorConfig& cfg) {
  const int m = residuals.height(), n = residuals.width();
  if (m < 1 || n < 1) throw std::invalid_argument("estimate_ring_bias: empty residual matrix");
  if (cfg.irls_iters < 1) throw std::invalid_argument("estimate_ring_bias: irls_iters must be >= 1");
  if (cfg.smooth_lambda < 0.0)
    throw std::invalid_argument("estimate_ring_bias: smooth_lambda must be >= 0");
  for (std::size_t i = 0; i < residuals.size(); ++i)
    if (!std::isfinite(residuals.data()[i]))
      throw std::invalid_argument("estimate_ring_bias: non-finite residuals");

  double delta = cfg.huber_delta;
  if (!(delta > 0.0)) {
    std::vector<double> all(residuals.data(), residuals.data() + residuals.size());
    const double med = median_inplace(all);
    for (auto& v : all) v = std::fabs(v - med);
    const double mad = median_inplace(all);
    delta = std::max(1.345 * mad, 1e-12);
  }

  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  for (int d = 0; d < n; ++d) {
    double loc = 0.0;
    for (int it = 0; it < cfg.irls_iters; ++it) {
      double sw = 0.0, swr = 0.0;
      for (int r = 0; r < m; ++r) {
        const double v = residuals(r, d);
        const double a = std::fabs(v - loc);
        const double w = (a <= delta) ? 1.0 : delta / a;
        sw += w;
        swr += w * v;
      }
      if (sw <= 0.0) break;
      loc = swr / sw;
    }
    c[static_cast<std::size_t>(d)] = loc;
  }

  if (cfg.smooth_lambda > 0.0) c = tikhonov_smooth_1d(c, cfg.smooth_lambda);

  double mean = 0.0;
  for (double v : c) mean += v;
  mean /= static_cast<double>(n);
  for (auto& v : c) v -= mean;
  return c;
}

Image<double> compute_residuals(const SinogramStack& stack,
                                const std::vector<Image<double>>& x) {
  if (static_cast<int>(x.size()) != stack.n_frames())
    throw std::invalid_argument("compute_residuals: one image per frame required");
  int rows = 0;
  for (const auto& f : stack.frames) rows += f.data.height();
  Image<double> r(rows, stack.n_det);
  int at = 0;
  for (int t = 0; t < stack.n_frames(); ++t) {
    const auto& f = stack.frames[static_cast<std::size_t>(t)];
    const auto& xt = x[static_cast<std::size_t>(t)];
    if (xt.height() != stack.img_h || xt.width() != stack.img_w)
      throw std::invalid_argument("compute_residuals: image dims do not match stack");
    const Image<double> proj = radon_forward(xt, stack.frame_geometry(t));
    for (int a = 0; a < f.data.height(); ++a) {
      for (int d = 0; d < stack.n_det; ++d)
        r(at, d) = static_cast<double>(f.data(a, d)) - proj(a, d);
      ++at;
    }
  }
  return r;
}

}  // namespace xct
