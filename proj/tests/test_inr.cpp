#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "xct/core/rng.hpp"
#include "xct/inr/adam.hpp"
#include "xct/inr/encoding.hpp"
#include "xct/inr/model.hpp"
#include "xct/inr/sampling.hpp"
#include "xct/inr/tv.hpp"

using namespace xct;

TEST_CASE("fourier features: layout, zero input, determinism") {
  EncodingConfig cfg;
  cfg.mapping_size = 8;
  cfg.scale = 3.0;
  cfg.input_dim = 3;
  cfg.seed = 5;
  Encoder<double> enc(cfg);
  CHECK(enc.out_dim() == 16);
  REQUIRE(enc.b.size() == 24);

  std::vector<double> zero(3, 0.0);
  std::vector<double> out = enc.encode(zero);
  REQUIRE(out.size() == 16);
  for (int i = 0; i < 8; ++i) CHECK(out[static_cast<std::size_t>(i)] == 1.0);   // cos block
  for (int i = 8; i < 16; ++i) CHECK(out[static_cast<std::size_t>(i)] == 0.0);  // sin block

  // Hand-check one coordinate against the stored frequency row.
  std::vector<double> v = {0.3, -0.7, 0.1};
  std::vector<double> got = enc.encode(v);
  for (int m = 0; m < 8; ++m) {
    double dotv = 0.0;
    for (int d = 0; d < 3; ++d) dotv += enc.b[static_cast<std::size_t>(m) * 3 + d] * v[static_cast<std::size_t>(d)];
    CHECK(got[static_cast<std::size_t>(m)] == doctest::Approx(std::cos(2.0 * M_PI * dotv)).epsilon(1e-12));
    CHECK(got[static_cast<std::size_t>(8 + m)] == doctest::Approx(std::sin(2.0 * M_PI * dotv)).epsilon(1e-12));
  }

  Encoder<double> enc2(cfg);
  for (std::size_t i = 0; i < enc.b.size(); ++i) CHECK(enc2.b[i] == enc.b[i]);
  cfg.seed = 6;
  Encoder<double> enc3(cfg);
  bool same = true;
  for (std::size_t i = 0; i < enc.b.size(); ++i) same = same && enc3.b[i] == enc.b[i];
  CHECK_FALSE(same);
}

TEST_CASE("frequency scale multiplies the gaussian draw") {
  EncodingConfig cfg;
  cfg.mapping_size = 512;
  cfg.input_dim = 4;
  cfg.scale = 5.0;
  cfg.seed = 77;
  Encoder<double> enc(cfg);
  double s2 = 0.0;
  for (double v : enc.b) s2 += v * v;
  const double stddev = std::sqrt(s2 / static_cast<double>(enc.b.size()));
  CHECK(stddev == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("mlp parameter layout and initialization ranges") {
  MlpConfig cfg;
  cfg.in_dim = 16;
  cfg.hidden = 8;
  cfg.n_layers = 3;
  cfg.omega0 = 30.0;
  cfg.seed = 3;
  Mlp<double> mlp(cfg);

  const std::size_t want = 16 * 8 + 8 + (8 * 8 + 8) * 2 + 8 + 1 + 4 * 3;
  CHECK(mlp.n_params() == want);
  CHECK(mlp.params.size() == want);

  // First layer: U(±1/in_dim); later layers and head: U(±sqrt(6/in)/ω₀).
  const double b0 = 1.0 / 16.0;
  for (std::size_t i = 0; i < 16 * 8; ++i) {
    CHECK(mlp.params[mlp.w_off(0) + i] <= b0);
    CHECK(mlp.params[mlp.w_off(0) + i] >= -b0);
  }
  const double b1 = std::sqrt(6.0 / 8.0) / 30.0;
  for (int l = 1; l < 3; ++l)
    for (std::size_t i = 0; i < 8 * 8; ++i) {
      CHECK(mlp.params[mlp.w_off(l) + i] <= b1);
      CHECK(mlp.params[mlp.w_off(l) + i] >= -b1);
    }
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(mlp.params[mlp.wout_off() + i] <= b1);
    CHECK(mlp.params[mlp.wout_off() + i] >= -b1);
    CHECK(mlp.params[mlp.bias_off(0) + i] == 0.0);
  }
  CHECK(mlp.params[mlp.bout_off()] == 0.0);
  for (int l = 0; l < 3; ++l) {
    CHECK(mlp.params[mlp.mod_off(l) + 0] == 1.0);  // a
    CHECK(mlp.params[mlp.mod_off(l) + 1] == 1.0);  // b
    CHECK(mlp.params[mlp.mod_off(l) + 2] == 0.0);  // c
    CHECK(mlp.params[mlp.mod_off(l) + 3] == 0.0);  // d
  }

  bool nonzero = false;
  for (std::size_t i = 0; i < 16 * 8; ++i) nonzero = nonzero || mlp.params[mlp.w_off(0) + i] != 0.0;
  CHECK(nonzero);
}

TEST_CASE("mlp forward equals a naive reference network") {
  MlpConfig cfg;
  cfg.in_dim = 4;
  cfg.hidden = 3;
  cfg.n_layers = 2;
  cfg.omega0 = 7.0;
  cfg.seed = 9;
  Mlp<double> mlp(cfg);
  // Perturb the modulations so the test exercises them.
  Rng rng(10);
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 4; ++j)
      mlp.params[mlp.mod_off(l) + static_cast<std::size_t>(j)] += 0.1 * rng.normal();

  const int n = 5;
  std::vector<double> feats(static_cast<std::size_t>(n) * 4);
  for (auto& v : feats) v = rng.uniform(-1, 1);
  std::vector<double> got(static_cast<std::size_t>(n));
  mlp.forward(feats.data(), n, got.data(), nullptr);

  for (int s = 0; s < n; ++s) {
    std::vector<double> h(feats.begin() + s * 4, feats.begin() + (s + 1) * 4);
    for (int l = 0; l < 2; ++l) {
      const int nin = l == 0 ? 4 : 3;
      const double a = mlp.params[mlp.mod_off(l) + 0];
      const double b = mlp.params[mlp.mod_off(l) + 1];
      const double c = mlp.params[mlp.mod_off(l) + 2];
      const double d = mlp.params[mlp.mod_off(l) + 3];
      std::vector<double> next(3);
      for (int j = 0; j < 3; ++j) {
        double pre = mlp.params[mlp.bias_off(l) + static_cast<std::size_t>(j)];
        for (int i = 0; i < nin; ++i)
          pre += mlp.params[mlp.w_off(l) + static_cast<std::size_t>(j) * nin + i] *
                 h[static_cast<std::size_t>(i)];
        next[static_cast<std::size_t>(j)] = a * std::sin(b * 7.0 * pre + c) + d;
      }
      h = next;
    }
    double out = mlp.params[mlp.bout_off()];
    for (int j = 0; j < 3; ++j)
      out += mlp.params[mlp.wout_off() + static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
    CHECK(got[static_cast<std::size_t>(s)] == doctest::Approx(out).epsilon(1e-12));
  }
}

TEST_CASE("mlp rejects non-finite parameters") {
  MlpConfig cfg;
  cfg.in_dim = 4;
  cfg.hidden = 3;
  cfg.n_layers = 1;
  Mlp<double> mlp(cfg);
  mlp.params[2] = std::nan("");
  std::vector<double> feats(4, 0.5);
  double out = 0.0;
  CHECK_THROWS_AS(mlp.forward(feats.data(), 1, &out, nullptr), std::invalid_argument);
}

TEST_CASE("mlp backward matches central finite differences (double)") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    MlpConfig cfg;
    cfg.in_dim = 6;
    cfg.hidden = 5;
    cfg.n_layers = 2;
    cfg.omega0 = 4.0;
    cfg.seed = seed;
    Mlp<double> mlp(cfg);
    Rng rng(seed + 100);
    for (int l = 0; l < cfg.n_layers; ++l)
      for (int j = 0; j < 4; ++j)
        mlp.params[mlp.mod_off(l) + static_cast<std::size_t>(j)] += 0.05 * rng.normal();

    const int n = 7;
    std::vector<double> feats(static_cast<std::size_t>(n) * 6);
    for (auto& v : feats) v = rng.uniform(-1, 1);
    std::vector<double> dout(static_cast<std::size_t>(n));
    for (auto& v : dout) v = rng.uniform(-1, 1);

    MlpCache<double> cache;
    std::vector<double> out(static_cast<std::size_t>(n));
    mlp.forward(feats.data(), n, out.data(), &cache);
    std::vector<double> grads;
    mlp.backward(cache, dout.data(), grads);
    REQUIRE(grads.size() == mlp.n_params());

    auto loss_at = [&](std::size_t idx, double value) {
      Mlp<double> m2 = mlp;
      m2.params[idx] = value;
      std::vector<double> o(static_cast<std::size_t>(n));
      m2.forward(feats.data(), n, o.data(), nullptr);
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += o[static_cast<std::size_t>(i)] * dout[static_cast<std::size_t>(i)];
      return acc;
    };

    // Probe a spread of parameter classes: W0, bias0, W1, Wout, bout, mods.
    std::vector<std::size_t> idxs = {mlp.w_off(0),     mlp.w_off(0) + 7,  mlp.bias_off(0) + 2,
                                     mlp.w_off(1) + 3, mlp.bias_off(1),   mlp.wout_off() + 1,
                                     mlp.bout_off(),   mlp.mod_off(0),    mlp.mod_off(0) + 1,
                                     mlp.mod_off(0) + 2, mlp.mod_off(0) + 3, mlp.mod_off(1) + 1};
    for (std::size_t idx : idxs) {
      const double x0 = mlp.params[idx];
      const double h = 1e-6 * std::max(1.0, std::abs(x0));
      const double fd =
          (loss_at(idx, x0 + h) - loss_at(idx, x0 - h)) / (2.0 * h);
      CHECK(grads[idx] == doctest::Approx(fd).epsilon(1e-6).scale(1e-3));
    }
  }
}

TEST_CASE("adam single step against hand-computed update") {
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  cfg.eps = 1e-8;
  Adam<double> opt(cfg, 3);
  std::vector<double> p = {1.0, -2.0, 0.5};
  std::vector<double> g = {0.1, -0.2, 0.0};
  opt.update(p, g);
  for (int i = 0; i < 3; ++i) {
    const double m = 0.1 * g[static_cast<std::size_t>(i)];
    const double v = 0.001 * g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(i)];
    const double mh = m / (1 - 0.9);
    const double vh = v / (1 - 0.999);
    const double want = (i == 0 ? 1.0 : i == 1 ? -2.0 : 0.5) -
                        0.01 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(p[static_cast<std::size_t>(i)] == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK(opt.step == 1);

  std::vector<double> bad = {0.1, std::nan(""), 0.0};
  CHECK_THROWS_AS(opt.update(p, bad), std::runtime_error);
  std::vector<double> short_g = {0.1};
  CHECK_THROWS_AS(opt.update(p, short_g), std::invalid_argument);

  // lr is mutable and respected.
  Adam<double> opt2(cfg, 1);
  opt2.lr = 0.0;
  std::vector<double> p2 = {3.0};
  std::vector<double> g2 = {1.0};
  opt2.update(p2, g2);
  CHECK(p2[0] == 3.0);
}

TEST_CASE("spatial smoothness penalty: exact zeros, known value, FD gradients") {
  const double eps = 1e-6;
  std::vector<double> flat(12, 0.75);
  std::vector<double> g(12, 0.0);
  CHECK(tv_spatial(flat.data(), 3, 4, eps, g.data()) == 0.0);
  for (double v : g) CHECK(v == 0.0);

  // 2×2 with one step: diffs x: |a−b| at two rows; y likewise.
  std::vector<double> img = {0.0, 1.0, 0.0, 1.0};
  const double want =
      (2 * (std::sqrt(1.0 + eps * eps) - eps) + 2 * (std::sqrt(eps * eps) - eps)) / 4.0;
  CHECK(tv_spatial(img.data(), 2, 2, eps, static_cast<double*>(nullptr)) == doctest::Approx(want).epsilon(1e-12));

  Rng rng(21);
  std::vector<double> rnd(20);
  for (auto& v : rnd) v = rng.uniform(-1, 1);
  std::vector<double> grad(20, 0.0);
  tv_spatial(rnd.data(), 4, 5, eps, grad.data());
  for (int i = 0; i < 20; ++i) {
    auto f = [&](double x) {
      std::vector<double> tmp = rnd;
      tmp[static_cast<std::size_t>(i)] = x;
      return tv_spatial(tmp.data(), 4, 5, eps, static_cast<double*>(nullptr));
    };
    const double fd = testing::central_fd(f, rnd[static_cast<std::size_t>(i)], 1e-6);
    // scale floor sits above central-difference cancellation noise (~1e-10)
    // so near-zero true gradients don't get compared against FD roundoff.
    CHECK(grad[static_cast<std::size_t>(i)] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
  }

  // Gradients accumulate.
  std::vector<double> acc(20, 1.0);
  tv_spatial(rnd.data(), 4, 5, eps, acc.data());
  for (int i = 0; i < 20; ++i)
    CHECK(acc[static_cast<std::size_t>(i)] ==
          doctest::Approx(1.0 + grad[static_cast<std::size_t>(i)]).epsilon(1e-12));

  CHECK_THROWS_AS(tv_spatial(rnd.data(), 1, 20, eps, static_cast<double*>(nullptr)), std::invalid_argument);
  CHECK_THROWS_AS(tv_spatial(rnd.data(), 4, 5, 0.0, static_cast<double*>(nullptr)), std::invalid_argument);
}

TEST_CASE("pairwise charbonnier: zero at equality, symmetric grads, detach") {
  const double eps = 1e-6;
  std::vector<double> a = {0.5, -0.25, 1.0};
  CHECK(charbonnier_pair(a.data(), a.data(), 3, eps, static_cast<double*>(nullptr), static_cast<double*>(nullptr)) == 0.0);

  Rng rng(22);
  std::vector<double> b = {0.1, 0.4, -0.9};
  std::vector<double> ga(3, 0.0), gb(3, 0.0);
  const double loss = charbonnier_pair(a.data(), b.data(), 3, eps, ga.data(), gb.data());
  double want = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
    want += std::sqrt(d * d + eps * eps) - eps;
  }
  want /= 3.0;
  CHECK(loss == doctest::Approx(want).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    auto f = [&](double x) {
      std::vector<double> tmp = a;
      tmp[static_cast<std::size_t>(i)] = x;
      return charbonnier_pair(tmp.data(), b.data(), 3, eps, static_cast<double*>(nullptr), static_cast<double*>(nullptr));
    };
    const double fd = testing::central_fd(f, a[static_cast<std::size_t>(i)], 1e-7);
    CHECK(ga[static_cast<std::size_t>(i)] == doctest::Approx(fd).epsilon(1e-5).scale(1e-3));
    CHECK(gb[static_cast<std::size_t>(i)] ==
          doctest::Approx(-ga[static_cast<std::size_t>(i)]).epsilon(1e-12).scale(1e-12));
  }

  // Detached second argument: only grad_a written.
  std::vector<double> ga2(3, 0.0);
  charbonnier_pair(a.data(), b.data(), 3, eps, ga2.data(), static_cast<double*>(nullptr));
  for (int i = 0; i < 3; ++i)
    CHECK(ga2[static_cast<std::size_t>(i)] == doctest::Approx(ga[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("sampling lattice: exact centers without jitter, bounded with") {
  std::vector<double> pts = jittered_grid<double>(4, 8, 1, nullptr);
  REQUIRE(pts.size() == 2u * 4 * 8);
  std::size_t i = 0;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 8; ++x) {
      CHECK(pts[i++] == doctest::Approx(2.0 * (x + 0.5) / 8.0 - 1.0).epsilon(1e-15));
      CHECK(pts[i++] == doctest::Approx(2.0 * (y + 0.5) / 4.0 - 1.0).epsilon(1e-15));
    }

  Rng rng(33);
  std::vector<double> jit = jittered_grid<double>(8, 8, 2, &rng);
  REQUIRE(jit.size() == 2u * 4 * 4);
  i = 0;
  for (int cy = 0; cy < 4; ++cy)
    for (int cx = 0; cx < 4; ++cx) {
      const double px = jit[i++], py = jit[i++];
      // The jittered point stays within its own 2×2 cell (pixel units: center ±1).
      const double cxp = (cx + 0.5) * 2.0 - 0.5, cyp = (cy + 0.5) * 2.0 - 0.5;
      CHECK(px >= 2.0 * (cxp - 1.0 + 0.5) / 8.0 - 1.0 - 1e-12);
      CHECK(px <= 2.0 * (cxp + 1.0 + 0.5) / 8.0 - 1.0 + 1e-12);
      CHECK(py >= 2.0 * (cyp - 1.0 + 0.5) / 8.0 - 1.0 - 1e-12);
      CHECK(py <= 2.0 * (cyp + 1.0 + 0.5) / 8.0 - 1.0 + 1e-12);
      CHECK(px >= -1.0);
      CHECK(px <= 1.0);
    }

  CHECK_THROWS_AS(jittered_grid<double>(9, 8, 2, nullptr), std::invalid_argument);
  CHECK_THROWS_AS(jittered_grid<double>(8, 9, 2, nullptr), std::invalid_argument);
}

TEST_CASE("checkpoint round-trip restores configs, frequencies, and weights") {
  EncodingConfig ec;
  ec.mapping_size = 12;
  ec.scale = 4.5;
  ec.input_dim = 4;
  ec.seed = 41;
  Encoder<float> enc(ec);
  MlpConfig mc;
  mc.in_dim = 24;
  mc.hidden = 10;
  mc.n_layers = 2;
  mc.omega0 = 25.0;
  mc.seed = 42;
  Mlp<float> mlp(mc);

  const std::string dir =
      (std::filesystem::temp_directory_path() / "xct_test_ckpt").string();
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/model.ckpt";
  save_model(path, enc, mlp);

  Encoder<float> enc2;
  Mlp<float> mlp2;
  load_model(path, enc2, mlp2);
  CHECK(enc2.cfg.mapping_size == ec.mapping_size);
  CHECK(enc2.cfg.scale == ec.scale);
  CHECK(enc2.cfg.input_dim == ec.input_dim);
  CHECK(enc2.cfg.seed == ec.seed);
  CHECK(mlp2.cfg.in_dim == mc.in_dim);
  CHECK(mlp2.cfg.hidden == mc.hidden);
  CHECK(mlp2.cfg.n_layers == mc.n_layers);
  CHECK(mlp2.cfg.omega0 == mc.omega0);
  REQUIRE(enc2.b.size() == enc.b.size());
  for (std::size_t i = 0; i < enc.b.size(); ++i) CHECK(enc2.b[i] == enc.b[i]);
  REQUIRE(mlp2.params.size() == mlp.params.size());
  for (std::size_t i = 0; i < mlp.params.size(); ++i) CHECK(mlp2.params[i] == mlp.params[i]);

  // Corrupted magic is rejected.
  std::string bytes;
  {
    FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) bytes.append(buf, n);
    std::fclose(f);
  }
  bytes[0] = 'Z';
  const std::string bad = dir + "/bad.ckpt";
  {
    FILE* f = std::fopen(bad.c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fwrite(bytes.data(), 1, bytes.size(), f);
    std::fclose(f);
  }
  Encoder<float> e3;
  Mlp<float> m3;
  CHECK_THROWS_AS(load_model(bad, e3, m3), std::runtime_error);
}
