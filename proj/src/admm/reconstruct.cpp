#include "xct/admm/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xct/core/ini.hpp"
#include "xct/core/raw_io.hpp"
#include "xct/core/rng.hpp"
#include "xct/inr/sampling.hpp"
#include "xct/inr/tv.hpp"
#include "xct/tomo/projector.hpp"

namespace xct {

namespace {

struct FrameState {
  Image<double> x, u;
  Image<float> q;
};

Image<double> to_double(const Image<float>& a) {
  Image<double> out(a.height(), a.width());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i];
  return out;
}

double coord_norm(int i, int n) { return n > 1 ? 2.0 * i / (n - 1) - 1.0 : 0.0; }

// s×s mean pooling of (x+u), row-major over coarse cells.
std::vector<float> pooled_target(const Image<double>& x, const Image<double>& u, int s) {
  const int ch = x.height() / s, cw = x.width() / s;
  std::vector<float> out(static_cast<std::size_t>(ch) * cw);
  const double inv = 1.0 / (static_cast<double>(s) * s);
  for (int cy = 0; cy < ch; ++cy) {
    for (int cx = 0; cx < cw; ++cx) {
      double acc = 0.0;
      for (int dy = 0; dy < s; ++dy)
        for (int dx = 0; dx < s; ++dx)
          acc += x(cy * s + dy, cx * s + dx) + u(cy * s + dy, cx * s + dx);
      out[static_cast<std::size_t>(cy) * cw + cx] = static_cast<float>(acc * inv);
    }
  }
  return out;
}

// Full-resolution render at pixel centers; extra holds the trailing
// coordinates ((z,) t). Chunked to bound scratch memory.
Image<float> render_full(const Encoder<float>& enc, const Mlp<float>& mlp, int h, int w,
                         const std::vector<float>& extra, MlpCache<float>& cache) {
  Image<float> img(h, w);
  const std::vector<float> base = jittered_grid<float>(h, w, 1, nullptr);
  const int dim = enc.cfg.input_dim;
  const int n_pix = h * w;
  const int chunk = std::min(n_pix, 4096);
  std::vector<float> coords, feats, out;
  for (int at = 0; at < n_pix; at += chunk) {
    const int n = std::min(chunk, n_pix - at);
    coords.resize(static_cast<std::size_t>(n) * dim);
    for (int i = 0; i < n; ++i) {
      coords[static_cast<std::size_t>(i) * dim + 0] = base[static_cast<std::size_t>(at + i) * 2 + 0];
      coords[static_cast<std::size_t>(i) * dim + 1] = base[static_cast<std::size_t>(at + i) * 2 + 1];
      for (std::size_t e = 0; e < extra.size(); ++e)
        coords[static_cast<std::size_t>(i) * dim + 2 + e] = extra[e];
    }
    feats.resize(static_cast<std::size_t>(n) * enc.out_dim());
    enc.encode(coords.data(), n, feats.data());
    out.resize(static_cast<std::size_t>(n));
    mlp.forward(feats.data(), n, out.data(), &cache);
    std::copy(out.begin(), out.end(), img.data() + at);
  }
  return img;
}

}  // namespace

int select_model(const std::vector<double>& residuals) {
  if (residuals.empty()) throw std::invalid_argument("select_model: empty history");
  int best = 0;
  for (int i = 1; i < static_cast<int>(residuals.size()); ++i)
    if (residuals[static_cast<std::size_t>(i)] < residuals[static_cast<std::size_t>(best)])
      best = i;
  return best;
}

AdmmResult admm_reconstruct_batch(const std::vector<const SinogramStack*>& slices,
                                  const ReconstructionConfig& cfg) {
  if (slices.empty()) throw std::invalid_argument("admm: no input slices");
  const SinogramStack& s0 = *slices[0];
  const int zc = static_cast<int>(slices.size());
  const int T = s0.n_frames();
  const int h = s0.img_h, w = s0.img_w;
  if (T < 1 || h < 1 || w < 1) throw std::invalid_argument("admm: empty stack");
  for (const SinogramStack* sp : slices) {
    if (sp->img_h != h || sp->img_w != w || sp->n_det != s0.n_det || sp->n_frames() != T ||
        sp->pixel_size != s0.pixel_size || sp->det_spacing != s0.det_spacing)
      throw std::invalid_argument("admm: slices disagree on geometry");
    for (int t = 0; t < T; ++t)
      if (sp->frames[static_cast<std::size_t>(t)].angles !=
          s0.frames[static_cast<std::size_t>(t)].angles)
        throw std::invalid_argument("admm: slices do not share the acquisition schedule");
    if (cfg.wls)
      for (const auto& f : sp->frames)
        if (f.weights.empty())
          throw std::invalid_argument("WLS requires photon counts");
  }
  if (cfg.outer_iters < 1 || cfg.inr_updates_per_iter < 1)
    throw std::invalid_argument("admm: iteration counts must be >= 1");
  const int s = cfg.downsample;
  if (s < 1 || h % s != 0 || w % s != 0)
    throw std::invalid_argument("admm: downsample factor must divide the image dims");
  const int ch = h / s, cw = w / s;
  const int n_c = ch * cw;

  // Per-(slice, frame) ADMM state, x via FBP init.
  std::vector<std::vector<FrameState>> st(static_cast<std::size_t>(zc));
  for (int zi = 0; zi < zc; ++zi) {
    st[static_cast<std::size_t>(zi)].resize(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
      auto& fs = st[static_cast<std::size_t>(zi)][static_cast<std::size_t>(t)];
      const Image<double> yd =
          to_double(slices[static_cast<std::size_t>(zi)]->frames[static_cast<std::size_t>(t)].data);
      fs.x = fbp(yd, slices[static_cast<std::size_t>(zi)]->frame_geometry(t), FbpFilter::ramlak);
      fs.u = Image<double>(h, w);
    }
  }

  EncodingConfig ec;
  ec.mapping_size = cfg.mapping_size;
  ec.scale = cfg.feature_scale;
  ec.input_dim = zc > 1 ? 4 : 3;
  ec.seed = cfg.seed;
  Encoder<float> enc(ec);
  MlpConfig mc;
  mc.in_dim = enc.out_dim();
  mc.hidden = cfg.hidden;
  mc.n_layers = cfg.n_layers;
  mc.omega0 = cfg.omega0;
  mc.seed = cfg.seed;
  Mlp<float> mlp(mc);
  Adam<float> opt(cfg.adam, mlp.n_params());
  double lr = cfg.adam.lr;
  Rng jrng(derive_seed(cfg.seed, 0x117e4));
  MlpCache<float> tcache, rcache;

  auto extra_coords = [&](int zi, int t) {
    std::vector<float> e;
    if (zc > 1) e.push_back(static_cast<float>(coord_norm(zi, zc)));
    e.push_back(static_cast<float>(coord_norm(t, T)));
    return e;
  };

  for (int zi = 0; zi < zc; ++zi)
    for (int t = 0; t < T; ++t)
      st[static_cast<std::size_t>(zi)][static_cast<std::size_t>(t)].q =
          render_full(enc, mlp, h, w, extra_coords(zi, t), rcache);

  std::vector<double> ring_c(static_cast<std::size_t>(s0.n_det), 0.0);
  std::vector<IterationRecord> history;
  std::vector<std::vector<float>> checkpoints;
  const int dim = ec.input_dim;
  std::vector<float> coords, feats, p, d_y, tvbuf, tvbuf2, grads;
  std::vector<std::vector<float>> pbar(static_cast<std::size_t>(zc));
  std::vector<std::vector<float>> ztilde(static_cast<std::size_t>(zc));

  for (int k = 0; k < cfg.outer_iters; ++k) {
    IterationRecord rec;
    rec.iter = k;
    rec.lr = lr;

    // x-updates (and per-frame data residuals on the corrected data).
    for (int zi = 0; zi < zc; ++zi) {
      const SinogramStack& sk = *slices[static_cast<std::size_t>(zi)];
      for (int t = 0; t < T; ++t) {
        auto& fs = st[static_cast<std::size_t>(zi)][static_cast<std::size_t>(t)];
        const auto& fr = sk.frames[static_cast<std::size_t>(t)];
        Image<double> yd = to_double(fr.data);
        if (cfg.ring.enabled)
          for (int r = 0; r < yd.height(); ++r)
            for (int d = 0; d < yd.width(); ++d)
              yd(r, d) -= ring_c[static_cast<std::size_t>(d)];
        Image<double> zt(h, w);
        for (std::size_t i = 0; i < zt.size(); ++i)
          zt.data()[i] = static_cast<double>(fs.q.data()[i]) - fs.u.data()[i];
        const ProjectorGeometry geom = sk.frame_geometry(t);
        CglsResult cr = cgls_xupdate(yd, geom, zt, cfg.cgls,
                                     cfg.wls ? &fr.weights : nullptr, &fs.x);
        fs.x = std::move(cr.x);
        if (cr.breakdown) ++rec.cgls_breakdowns;
        const Image<double> proj = radon_forward(fs.x, geom);
        double se = 0.0;
        for (std::size_t i = 0; i < proj.size(); ++i) {
          const double d = yd.data()[i] - proj.data()[i];
          se += d * d;
        }
        rec.data_residuals.push_back(std::sqrt(se));
      }
    }

    // Ring-bias re-estimation from raw-data residuals, stacked across slices.
    if (cfg.ring.enabled && cfg.ring.estimate) {
      int rows = 0;
      for (int zi = 0; zi < zc; ++zi)
        for (const auto& f : slices[static_cast<std::size_t>(zi)]->frames)
          rows += f.data.height();
      Image<double> rmat(rows, s0.n_det);
      int at = 0;
      for (int zi = 0; zi < zc; ++zi) {
        std::vector<Image<double>> xs;
        for (int t = 0; t < T; ++t)
          xs.push_back(st[static_cast<std::size_t>(zi)][static_cast<std::size_t>(t)].x);
        const Image<double> rz = compute_residuals(*slices[static_cast<std::size_t>(zi)], xs);
        std::copy(rz.data(), rz.data() + rz.size(), rmat.row(at));
        at += rz.height();
      }
      ring_c = estimate_ring_bias(rmat, cfg.ring.estimator);
    }

    // Network updates, alternating frame order between iterations.
    std::vector<int> order(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) order[static_cast<std::size_t>(t)] = t;
    if (k % 2 == 1) std::reverse(order.begin(), order.end());
    for (auto& pb : pbar) pb.clear();

    const bool use_tvs = cfg.tv.lambda_s > 0.0 && k > cfg.tv.k_s && ch >= 2 && cw >= 2;
    const bool use_tvt = cfg.tv.lambda_t > 0.0 && k > cfg.tv.k_t;
    const bool use_tva = cfg.tv.lambda_a > 0.0 && zc > 1;
    const std::size_t zn_c = static_cast<std::size_t>(zc) * n_c;

    for (int oi = 0; oi < T; ++oi) {
      const int t = order[static_cast<std::size_t>(oi)];
      for (int zi = 0; zi < zc; ++zi) {
        const auto& fs = st[static_cast<std::size_t>(zi)][static_cast<std::size_t>(t)];
        ztilde[static_cast<std::size_t>(zi)] = pooled_target(fs.x, fs.u, s);
      }
      const float tn = static_cast<float>(coord_norm(t, T));

      for (int step = 0; step < cfg.inr_updates_per_iter; ++step) {
        const std::vector<float> grid = jittered_grid<float>(h, w, s, &jrng);
        coords.resize(zn_c * static_cast<std::size_t>(dim));
        for (int zi = 0; zi < zc; ++zi) {
          const float zn = static_cast<float>(coord_norm(zi, zc));
          for (int i = 0; i < n_c; ++i) {
            float* row = coords.data() +
                         (static_cast<std::size_t>(zi) * n_c + i) * static_cast<std::size_t>(dim);
            row[0] = grid[static_cast<std::size_t>(i) * 2 + 0];
            row[1] = grid[static_cast<std::size_t>(i) * 2 + 1];
            if (zc > 1) {
              row[2] = zn;
              row[3] = tn;
            } else {
              row[2] = tn;
            }
          }
        }
        feats.resize(zn_c * static_cast<std::size_t>(enc.out_dim()));
        enc.encode(coords.data(), static_cast<int>(zn_c), feats.data());
        p.resize(zn_c);
        mlp.forward(feats.data(), static_cast<int>(zn_c), p.data(), &tcache);
        d_y.assign(zn_c, 0.0f);

        double mse_term = 0.0, tvs_term = 0.0, tvt_term = 0.0, tva_term = 0.0;
        for (int zi = 0; zi < zc; ++zi) {
          float* pz = p.data() + static_cast<std::size_t>(zi) * n_c;
          float* dz = d_y.data() + static_cast<std::size_t>(zi) * n_c;
          const auto& ztl = ztilde[static_cast<std::size_t>(zi)];
          double se = 0.0;
          const double gscale = 2.0 / (static_cast<double>(n_c) * zc);
          for (int i = 0; i < n_c; ++i) {
            const double d = static_cast<double>(pz[i]) - ztl[static_cast<std::size_t>(i)];
            se += d * d;
            dz[i] += static_cast<float>(d * gscale);
          }
          mse_term += se / n_c / zc;
          if (use_tvs) {
            tvbuf.assign(static_cast<std::size_t>(n_c), 0.0f);
            const double l = tv_spatial(pz, ch, cw, cfg.tv.eps_tv, tvbuf.data());
            const float sc = static_cast<float>(cfg.tv.lambda_s / zc);
            for (int i = 0; i < n_c; ++i) dz[i] += sc * tvbuf[static_cast<std::size_t>(i)];
            tvs_term += cfg.tv.lambda_s * l / zc;
          }
          if (use_tvt && !pbar[static_cast<std::size_t>(zi)].empty()) {
            tvbuf.assign(static_cast<std::size_t>(n_c), 0.0f);
            const double l =
                charbonnier_pair(pz, pbar[static_cast<std::size_t>(zi)].data(),
                                 static_cast<std::size_t>(n_c), cfg.tv.eps_tv, tvbuf.data(),
                                 static_cast<float*>(nullptr));
            const float sc = static_cast<float>(cfg.tv.lambda_t / zc);
            for (int i = 0; i < n_c; ++i) dz[i] += sc * tvbuf[static_cast<std::size_t>(i)];
            tvt_term += cfg.tv.lambda_t * l / zc;
          }
        }
        if (use_tva) {
          for (int zi = 0; zi + 1 < zc; ++zi) {
            float* pz = p.data() + static_cast<std::size_t>(zi) * n_c;
            float* pz1 = p.data() + static_cast<std::size_t>(zi + 1) * n_c;
            float* dz = d_y.data() + static_cast<std::size_t>(zi) * n_c;
            float* dz1 = d_y.data() + static_cast<std::size_t>(zi + 1) * n_c;
            tvbuf.assign(static_cast<std::size_t>(n_c), 0.0f);
            tvbuf2.assign(static_cast<std::size_t>(n_c), 0.0f);
            const double l = charbonnier_pair(pz, pz1, static_cast<std::size_t>(n_c),
                                              cfg.tv.eps_tv, tvbuf.data(), tvbuf2.data());
            const float sc = static_cast<float>(cfg.tv.lambda_a / (zc - 1));
            for (int i = 0; i < n_c; ++i) {
              dz[i] += sc * tvbuf[static_cast<std::size_t>(i)];
              dz1[i] += sc * tvbuf2[static_cast<std::size_t>(i)];
            }
            tva_term += cfg.tv.lambda_a * l / (zc - 1);
          }
        }
        const double total = mse_term + tvs_term + tvt_term + tva_term;
        if (!std::isfinite(total))
          throw std::runtime_error(
              "admm: non-finite loss at outer " + std::to_string(k) + ", frame " +
              std::to_string(t) + ", step " + std::to_string(step) + " (mse " +
              std::to_string(mse_term) + ", tv_s " + std::to_string(tvs_term) + ", tv_t " +
              std::to_string(tvt_term) + ", tv_a " + std::to_string(tva_term) + ")");

        mlp.backward(tcache, d_y.data(), grads);
        opt.lr = lr;
        opt.update(mlp.params, grads);

        if (step + 1 == cfg.inr_updates_per_iter) {
          rec.loss_mse += mse_term / T;
          rec.loss_tv_s += tvs_term / T;
          rec.loss_tv_t += tvt_term / T;
          rec.loss_tv_a += tva_term / T;
          for (int zi = 0; zi < zc; ++zi)
            pbar[static_cast<std::size_t>(zi)].assign(
                p.data() + static_cast<std::size_t>(zi) * n_c,
                p.data() + static_cast<std::size_t>(zi + 1) * n_c);
        }
      }
    }

    // q-update at full resolution, then dual update and residual tracking.
    double res_sum = 0.0;
    for (int zi = 0; zi < zc; ++zi) {
      for (int t = 0; t < T; ++t) {
        auto& fs = st[static_cast<std::size_t>(zi)][static_cast<std::size_t>(t)];
        fs.q = render_full(enc, mlp, h, w, extra_coords(zi, t), rcache);
        double se = 0.0;
        for (std::size_t i = 0; i < fs.u.size(); ++i) {
          const double d = fs.x.data()[i] - static_cast<double>(fs.q.data()[i]);
          fs.u.data()[i] += d;
          se += d * d;
        }
        res_sum += std::sqrt(se);
      }
    }
    rec.mean_residual = res_sum / (static_cast<double>(zc) * T);
    history.push_back(rec);
    checkpoints.push_back(mlp.params);
    lr *= cfg.lr_decay;
  }

  std::vector<double> residuals;
  for (const auto& r : history) residuals.push_back(r.mean_residual);
  const int best = select_model(residuals);

  AdmmResult res;
  res.encoder = enc;
  res.mlp = mlp;
  res.mlp.params = checkpoints[static_cast<std::size_t>(best)];
  res.n_slices = zc;
  res.n_frames = T;
  res.history = std::move(history);
  res.best_iter = best;
  if (cfg.ring.enabled) res.ring_estimate = ring_c;
  for (int zi = 0; zi < zc; ++zi)
    for (int t = 0; t < T; ++t)
      res.frames.push_back(render_full(res.encoder, res.mlp, h, w, extra_coords(zi, t), rcache));
  return res;
}

AdmmResult admm_reconstruct(const SinogramStack& stack, const ReconstructionConfig& cfg) {
  return admm_reconstruct_batch({&stack}, cfg);
}

const Image<float>& Admm4dResult::frame(int z, int t) const {
  int b = 0;
  for (std::size_t i = 0; i < batch_starts.size(); ++i)
    if (batch_starts[i] <= z) b = static_cast<int>(i);
  const auto& batch = batches[static_cast<std::size_t>(b)];
  const int local = z - batch_starts[static_cast<std::size_t>(b)];
  return batch.frames[static_cast<std::size_t>(local) * n_frames + t];
}

Admm4dResult reconstruct_4d(const std::vector<SinogramStack>& stacks,
                            const ReconstructionConfig& cfg) {
  if (stacks.empty()) throw std::invalid_argument("reconstruct_4d: no slices");
  if (cfg.axial_batch < 1) throw std::invalid_argument("reconstruct_4d: axial_batch must be >= 1");
  Admm4dResult out;
  out.n_slices = static_cast<int>(stacks.size());
  out.n_frames = stacks[0].n_frames();
  for (int start = 0; start < out.n_slices; start += cfg.axial_batch) {
    const int stop = std::min(start + cfg.axial_batch, out.n_slices);
    std::vector<const SinogramStack*> batch;
    for (int z = start; z < stop; ++z) batch.push_back(&stacks[static_cast<std::size_t>(z)]);
    out.batch_starts.push_back(start);
    out.batches.push_back(admm_reconstruct_batch(batch, cfg));
  }
  return out;
}

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history) {
  if (history.empty()) throw std::invalid_argument("write_history_csv: empty history");
  std::string s = "iteration,mean_residual,lr,loss_mse,loss_tv_s,loss_tv_t,loss_tv_a,cgls_breakdowns";
  const std::size_t nf = history[0].data_residuals.size();
  for (std::size_t i = 0; i < nf; ++i) s += ",data_res_" + std::to_string(i);
  s += "\n";
  for (const auto& r : history) {
    s += std::to_string(r.iter) + "," + fmt_g17(r.mean_residual) + "," + fmt_g17(r.lr) + "," +
         fmt_g17(r.loss_mse) + "," + fmt_g17(r.loss_tv_s) + "," + fmt_g17(r.loss_tv_t) + "," +
         fmt_g17(r.loss_tv_a) + "," + std::to_string(r.cgls_breakdowns);
    for (double v : r.data_residuals) s += "," + fmt_g17(v);
    s += "\n";
  }
  write_text_file(path, s);
}

}  // namespace xct
