#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "xct/acquisition/scan.hpp"
#include "xct/acquisition/schedule.hpp"
#include "xct/core/rng.hpp"
#include "xct/solvers/cgls.hpp"
#include "xct/solvers/ring.hpp"

using namespace xct;

namespace {

// Unit pixel size keeps P'P on the same scale as the mu=1 anchor, so the
// solver actually has to balance both terms rather than coast on the anchor.
ProjectorGeometry small_geometry(int hw, int n_angles) {
  ProjectorGeometry g;
  g.img_h = hw;
  g.img_w = hw;
  g.pixel_size = 1.0;
  g.n_det = hw + 4;
  g.det_spacing = 0.0;
  g.step_frac = 0.5;
  g.angles.resize(static_cast<std::size_t>(n_angles));
  for (int j = 0; j < n_angles; ++j)
    g.angles[static_cast<std::size_t>(j)] = j * M_PI / n_angles;
  return g;
}

// Direct solve of (PᵀWP + μI) x = PᵀW y + μ z through the materialized dense
// operator.
Image<double> dense_xupdate(const Image<double>& y, const ProjectorGeometry& g,
                            const Image<double>& z, double mu, const Image<float>* weights) {
  Image<double> p = testing::materialize_projector(g);
  const int rows = p.height(), cols = p.width();
  std::vector<double> a(static_cast<std::size_t>(cols) * cols, 0.0);
  std::vector<double> b(static_cast<std::size_t>(cols), 0.0);
  for (int i = 0; i < cols; ++i)
    for (int j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (int r = 0; r < rows; ++r) {
        const double w = weights ? static_cast<double>(weights->data()[r]) : 1.0;
        acc += p(r, i) * w * p(r, j);
      }
      a[static_cast<std::size_t>(i) * cols + j] = acc + (i == j ? mu : 0.0);
    }
  for (int i = 0; i < cols; ++i) {
    double acc = 0.0;
    for (int r = 0; r < rows; ++r) {
      const double w = weights ? static_cast<double>(weights->data()[r]) : 1.0;
      acc += p(r, i) * w * y.data()[r];
    }
    b[static_cast<std::size_t>(i)] = acc + mu * (z.empty() ? 0.0 : z.data()[i]);
  }
  std::vector<double> x = testing::dense_solve(a, b, cols);
  Image<double> out(g.img_h, g.img_w);
  std::copy(x.begin(), x.end(), out.data());
  return out;
}

double rel_err(const Image<double>& got, const Image<double>& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double d = got.data()[i] - want.data()[i];
    num += d * d;
    den += want.data()[i] * want.data()[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("least-squares update matches the dense normal equations") {
  ProjectorGeometry g = small_geometry(8, 16);
  Rng rng(31);
  Image<double> truth(8, 8);
  for (auto& v : truth.vec()) v = rng.uniform(0, 0.4);
  Image<double> y = radon_forward(truth, g);
  for (auto& v : y.vec()) v += 0.002 * rng.normal();
  Image<double> z(8, 8);
  for (auto& v : z.vec()) v = rng.uniform(0, 0.4);
  Image<float> w(static_cast<int>(g.angles.size()), g.n_det);
  for (auto& v : w.vec()) v = static_cast<float>(rng.uniform(0.2, 2.0));

  for (double mu : {0.0, 0.1, 10.0}) {
    CglsConfig cfg;
    cfg.max_iters = 400;
    cfg.rel_tol = 1e-12;
    cfg.mu = mu;

    CglsResult plain = cgls_xupdate(y, g, mu == 0.0 ? Image<double>() : z, cfg);
    Image<double> want = dense_xupdate(y, g, mu == 0.0 ? Image<double>() : z, mu, nullptr);
    CHECK(rel_err(plain.x, want) <= 1e-6);

    CglsResult wls = cgls_xupdate(y, g, mu == 0.0 ? Image<double>() : z, cfg, &w);
    Image<double> want_w = dense_xupdate(y, g, mu == 0.0 ? Image<double>() : z, mu, &w);
    CHECK(rel_err(wls.x, want_w) <= 1e-6);
  }
}

TEST_CASE("residual history starts at the initial normal residual and decreases") {
  ProjectorGeometry g = small_geometry(8, 12);
  Rng rng(77);
  Image<double> truth(8, 8);
  for (auto& v : truth.vec()) v = rng.uniform(0, 0.4);
  Image<double> y = radon_forward(truth, g);
  CglsConfig cfg;
  cfg.max_iters = 30;
  cfg.rel_tol = 1e-10;
  cfg.mu = 0.5;
  Image<double> z(8, 8, 0.0);
  CglsResult res = cgls_xupdate(y, g, z, cfg);
  REQUIRE(res.normal_residuals.size() >= 2);
  CHECK(res.iters >= 1);
  CHECK_FALSE(res.breakdown);
  CHECK(res.normal_residuals.back() < res.normal_residuals.front());

  // Entry 0 must equal ‖Pᵀy + μ·(z−0)‖ stacked = ‖[P;√μ I]ᵀ [y;√μ z]‖ at x = 0.
  Image<double> pty = radon_adjoint(y, g);
  double want0 = 0.0;
  for (std::size_t i = 0; i < pty.size(); ++i) {
    const double v = pty.data()[i] + cfg.mu * z.data()[i];
    want0 += v * v;
  }
  CHECK(res.normal_residuals.front() == doctest::Approx(std::sqrt(want0)).epsilon(1e-12));
}

TEST_CASE("warm start from the solution converges immediately") {
  ProjectorGeometry g = small_geometry(8, 12);
  Rng rng(12);
  Image<double> truth(8, 8);
  for (auto& v : truth.vec()) v = rng.uniform(0, 0.4);
  Image<double> y = radon_forward(truth, g);
  Image<double> z = truth;
  CglsConfig cfg;
  cfg.max_iters = 200;
  cfg.rel_tol = 1e-10;
  cfg.mu = 1.0;
  CglsResult first = cgls_xupdate(y, g, z, cfg);
  CglsResult second = cgls_xupdate(y, g, z, cfg, nullptr, &first.x);
  // The restarted solve begins at the optimum: it may spend a few iterations
  // on roundoff-level residuals but must stay at the solution and finish far
  // sooner than the cold start.
  CHECK(second.iters <= 5);
  CHECK(second.iters < first.iters);
  CHECK(rel_err(second.x, first.x) <= 1e-8);
}

TEST_CASE("zero data with zero anchor returns zero without breakdown flags") {
  ProjectorGeometry g = small_geometry(8, 12);
  Image<double> y(12, g.n_det, 0.0);
  Image<double> z(8, 8, 0.0);
  CglsConfig cfg;
  CglsResult res = cgls_xupdate(y, g, z, cfg);
  for (double v : res.x.vec()) CHECK(v == 0.0);
  CHECK_FALSE(res.breakdown);
  CHECK(res.iters == 0);
}

TEST_CASE("cgls input validation") {
  ProjectorGeometry g = small_geometry(8, 12);
  Image<double> y(12, g.n_det, 0.0);
  Image<double> bad_z(4, 4, 0.0);
  CHECK_THROWS_AS(cgls_xupdate(y, g, bad_z, CglsConfig()), std::invalid_argument);
  Image<double> bad_y(5, 5, 0.0);
  CHECK_THROWS_AS(cgls_xupdate(bad_y, g, Image<double>(), CglsConfig()),
                  std::invalid_argument);
  Image<double> nan_y(12, g.n_det, 0.0);
  nan_y(0, 0) = std::nan("");
  CHECK_THROWS_AS(cgls_xupdate(nan_y, g, Image<double>(), CglsConfig()),
                  std::invalid_argument);
  Image<float> bad_w(12, g.n_det, -1.0f);
  CHECK_THROWS_AS(cgls_xupdate(y, g, Image<double>(), CglsConfig(), &bad_w),
                  std::invalid_argument);
}

TEST_CASE("huge huber delta reduces to the column mean") {
  Rng rng(9);
  const int rows = 40, cols = 12;
  Image<double> r(rows, cols);
  for (auto& v : r.vec()) v = rng.uniform(-1, 1);
  RingEstimatorConfig cfg;
  cfg.huber_delta = 1e9;
  cfg.irls_iters = 10;
  std::vector<double> got = estimate_ring_bias(r, cfg);

  std::vector<double> means(cols, 0.0);
  for (int c = 0; c < cols; ++c) {
    for (int row = 0; row < rows; ++row) means[static_cast<std::size_t>(c)] += r(row, c);
    means[static_cast<std::size_t>(c)] /= rows;
  }
  const double grand = [&] {
    double s = 0.0;
    for (double v : means) s += v;
    return s / cols;
  }();
  for (int c = 0; c < cols; ++c)
    CHECK(got[static_cast<std::size_t>(c)] ==
          doctest::Approx(means[static_cast<std::size_t>(c)] - grand).epsilon(1e-8).scale(1.0));
}

TEST_CASE("tiny huber delta approaches the column median") {
  Rng rng(10);
  const int rows = 51, cols = 6;
  Image<double> r(rows, cols);
  for (auto& v : r.vec()) v = rng.uniform(-1, 1) + 0.2;
  RingEstimatorConfig cfg;
  cfg.huber_delta = 1e-7;
  cfg.irls_iters = 300;
  std::vector<double> got = estimate_ring_bias(r, cfg);

  std::vector<double> med(cols);
  for (int c = 0; c < cols; ++c) {
    std::vector<double> col(rows);
    for (int row = 0; row < rows; ++row) col[static_cast<std::size_t>(row)] = r(row, c);
    std::nth_element(col.begin(), col.begin() + rows / 2, col.end());
    med[static_cast<std::size_t>(c)] = col[rows / 2];
  }
  const double grand = [&] {
    double s = 0.0;
    for (double v : med) s += v;
    return s / cols;
  }();
  for (int c = 0; c < cols; ++c)
    CHECK(got[static_cast<std::size_t>(c)] ==
          doctest::Approx(med[static_cast<std::size_t>(c)] - grand).epsilon(1e-3).scale(1.0));
}

TEST_CASE("estimator output is zero-mean and robust to a gross outlier row") {
  Rng rng(11);
  const int rows = 30, cols = 10;
  Image<double> r(rows, cols);
  std::vector<double> truth(cols);
  for (int c = 0; c < cols; ++c) truth[static_cast<std::size_t>(c)] = 0.05 * std::sin(0.7 * c);
  const double tmean = [&] {
    double s = 0.0;
    for (double v : truth) s += v;
    return s / cols;
  }();
  for (int c = 0; c < cols; ++c) truth[static_cast<std::size_t>(c)] -= tmean;
  for (int row = 0; row < rows; ++row)
    for (int c = 0; c < cols; ++c)
      r(row, c) = truth[static_cast<std::size_t>(c)] + 0.001 * rng.normal();
  // One wild row that a plain mean would absorb.
  for (int c = 0; c < cols; ++c) r(3, c) += 5.0 * ((c % 2) ? 1.0 : -1.0);

  RingEstimatorConfig cfg;  // automatic delta
  std::vector<double> got = estimate_ring_bias(r, cfg);
  double mean = 0.0;
  for (double v : got) mean += v;
  CHECK(std::abs(mean / cols) <= 1e-12);
  for (int c = 0; c < cols; ++c)
    CHECK(std::abs(got[static_cast<std::size_t>(c)] - truth[static_cast<std::size_t>(c)]) <=
          0.02);
}

TEST_CASE("tikhonov smoothing matches a dense solve and smooths") {
  Rng rng(14);
  const int n = 24;
  std::vector<double> in(static_cast<std::size_t>(n));
  for (auto& v : in) v = rng.uniform(-1, 1);
  const double lambda = 3.0;
  std::vector<double> got = tikhonov_smooth_1d(in, lambda);

  // (I + λ DᵀD): diag 1+λ·deg with deg 1 at the ends, 2 inside; off-diag −λ.
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int deg = (i == 0 || i == n - 1) ? 1 : 2;
    a[static_cast<std::size_t>(i) * n + i] = 1.0 + lambda * deg;
    if (i > 0) a[static_cast<std::size_t>(i) * n + i - 1] = -lambda;
    if (i < n - 1) a[static_cast<std::size_t>(i) * n + i + 1] = -lambda;
  }
  std::vector<double> want = testing::dense_solve(a, in, n);
  for (int i = 0; i < n; ++i)
    CHECK(got[static_cast<std::size_t>(i)] ==
          doctest::Approx(want[static_cast<std::size_t>(i)]).epsilon(1e-12).scale(1.0));

  std::vector<double> same = tikhonov_smooth_1d(in, 0.0);
  for (int i = 0; i < n; ++i) CHECK(same[static_cast<std::size_t>(i)] == in[static_cast<std::size_t>(i)]);
}

TEST_CASE("residual stacking follows (frame, angle) row order") {
  const int hw = 8;
  DynamicSequence seq;
  seq.pixel_size = 0.003;
  Rng rng(15);
  for (int t = 0; t < 8; ++t) {
    Image<float> f(hw, hw);
    for (auto& v : f.vec()) v = static_cast<float>(rng.uniform() * 0.3);
    seq.frames.push_back(f);
    seq.times.push_back(t);
  }
  ProjectorGeometry g;
  g.img_h = hw;
  g.img_w = hw;
  g.pixel_size = 0.003;
  g.n_det = hw;
  g.step_frac = 0.5;
  SinogramStack stack = simulate_scan(seq, build_schedule(4, 2, 2), hw, g);

  std::vector<Image<double>> x;
  for (int t = 0; t < stack.n_frames(); ++t) {
    Image<double> img(hw, hw);
    for (auto& v : img.vec()) v = rng.uniform(0, 0.3);
    x.push_back(img);
  }
  Image<double> r = compute_residuals(stack, x);
  REQUIRE(r.height() == 4 * 2);
  REQUIRE(r.width() == hw);
  int row = 0;
  for (int t = 0; t < stack.n_frames(); ++t) {
    Image<double> proj = radon_forward(x[static_cast<std::size_t>(t)], stack.frame_geometry(t));
    for (int a = 0; a < proj.height(); ++a, ++row)
      for (int d = 0; d < hw; ++d)
        CHECK(r(row, d) ==
              doctest::Approx(stack.frames[static_cast<std::size_t>(t)].data(a, d) - proj(a, d))
                  .epsilon(1e-12)
                  .scale(1e-6));
  }
}
