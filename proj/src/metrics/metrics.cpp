#include "xct/metrics/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "xct/core/ini.hpp"
#include "xct/core/raw_io.hpp"

namespace xct {

namespace {

bool inside_circle(int y, int x, int h, int w) {
  const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0;
  const double r = std::min(h, w) / 2.0;
  const double dy = y - cy, dx = x - cx;
  return dy * dy + dx * dx <= r * r;
}

std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(window));
  const int half = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - half;
    g[static_cast<std::size_t>(i)] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable valid-mode Gaussian filter: output (h−window+1)×(w−window+1).
Image<double> filter_valid(const Image<double>& img, const std::vector<double>& taps) {
  const int win = static_cast<int>(taps.size());
  const int h = img.height(), w = img.width();
  Image<double> horiz(h, w - win + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + win <= w; ++x) {
      double s = 0.0;
      for (int i = 0; i < win; ++i) s += taps[static_cast<std::size_t>(i)] * img(y, x + i);
      horiz(y, x) = s;
    }
  }
  Image<double> out(h - win + 1, w - win + 1);
  for (int y = 0; y + win <= h; ++y) {
    for (int x = 0; x < horiz.width(); ++x) {
      double s = 0.0;
      for (int i = 0; i < win; ++i) s += taps[static_cast<std::size_t>(i)] * horiz(y + i, x);
      out(y, x) = s;
    }
  }
  return out;
}

void check_pair(const Image<float>& x, const Image<float>& ref) {
  if (!x.same_shape(ref)) throw std::invalid_argument("metrics: image shape mismatch");
  if (x.height() < 1 || x.width() < 1) throw std::invalid_argument("metrics: empty image");
}

}  // namespace

double psnr(const Image<float>& x, const Image<float>& ref, double max_val, bool masked) {
  check_pair(x, ref);
  if (!(max_val > 0.0)) throw std::invalid_argument("psnr: max_val must be > 0");
  double se = 0.0;
  long n = 0;
  for (int y = 0; y < x.height(); ++y) {
    for (int xx = 0; xx < x.width(); ++xx) {
      if (masked && !inside_circle(y, xx, x.height(), x.width())) continue;
      const double d = static_cast<double>(x(y, xx)) - static_cast<double>(ref(y, xx));
      se += d * d;
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("psnr: empty mask");
  const double mse = se / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_val * max_val / mse);
}

double ssim(const Image<float>& x, const Image<float>& ref, double max_val,
            const SsimConfig& cfg, bool masked) {
  check_pair(x, ref);
  if (!(max_val > 0.0)) throw std::invalid_argument("ssim: max_val must be > 0");
  if (cfg.window < 1 || cfg.window % 2 == 0)
    throw std::invalid_argument("ssim: window must be odd and positive");
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("ssim: sigma must be > 0");
  const double c1 = (cfg.k1 * max_val) * (cfg.k1 * max_val);
  const double c2 = (cfg.k2 * max_val) * (cfg.k2 * max_val);
  const int h = x.height(), w = x.width(), win = cfg.window, half = win / 2;
  const std::vector<double> taps = gaussian_taps(win, cfg.sigma);

  if (!masked) {
    if (h < win || w < win)
      throw std::invalid_argument("ssim: image smaller than the window");
    Image<double> xd(h, w), yd(h, w), xx(h, w), yy(h, w), xy(h, w);
    for (std::size_t i = 0; i < xd.size(); ++i) {
      const double a = x.data()[i], b = ref.data()[i];
      xd.data()[i] = a;
      yd.data()[i] = b;
      xx.data()[i] = a * a;
      yy.data()[i] = b * b;
      xy.data()[i] = a * b;
    }
    const Image<double> mx = filter_valid(xd, taps), my = filter_valid(yd, taps);
    const Image<double> sxx = filter_valid(xx, taps), syy = filter_valid(yy, taps),
                        sxy = filter_valid(xy, taps);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double ma = mx.data()[i], mb = my.data()[i];
      const double va = sxx.data()[i] - ma * ma;
      const double vb = syy.data()[i] - mb * mb;
      const double cab = sxy.data()[i] - ma * mb;
      const double num = (2.0 * ma * mb + c1) * (2.0 * cab + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      acc += num / den;
    }
    return acc / static_cast<double>(mx.size());
  }

  double acc = 0.0;
  long count = 0;
  for (int cy = 0; cy < h; ++cy) {
    for (int cx = 0; cx < w; ++cx) {
      if (!inside_circle(cy, cx, h, w)) continue;
      double sw = 0.0, ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        const int yy2 = cy + dy;
        if (yy2 < 0 || yy2 >= h) continue;
        for (int dx = -half; dx <= half; ++dx) {
          const int xx2 = cx + dx;
          if (xx2 < 0 || xx2 >= w) continue;
          if (!inside_circle(yy2, xx2, h, w)) continue;
          const double wt = taps[static_cast<std::size_t>(dy + half)] *
                            taps[static_cast<std::size_t>(dx + half)];
          const double a = x(yy2, xx2), b = ref(yy2, xx2);
          sw += wt;
          ma += wt * a;
          mb += wt * b;
          saa += wt * a * a;
          sbb += wt * b * b;
          sab += wt * a * b;
        }
      }
      ma /= sw;
      mb /= sw;
      const double va = saa / sw - ma * ma;
      const double vb = sbb / sw - mb * mb;
      const double cab = sab / sw - ma * mb;
      const double num = (2.0 * ma * mb + c1) * (2.0 * cab + c2);
      const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
      acc += num / den;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("ssim: empty mask");
  return acc / static_cast<double>(count);
}

MetricReport evaluate_sequence(const std::vector<Image<float>>& recon,
                               const std::vector<Image<float>>& gt, bool masked,
                               const SsimConfig& cfg) {
  if (recon.size() != gt.size() || recon.empty())
    throw std::invalid_argument("evaluate_sequence: need equal nonzero frame counts");
  MetricReport rep;
  rep.masked = masked;
  double mv = 0.0;
  for (const auto& g : gt)
    for (std::size_t i = 0; i < g.size(); ++i)
      mv = std::max(mv, static_cast<double>(g.data()[i]));
  if (!(mv > 0.0)) mv = 1.0;
  rep.max_val = mv;

  for (std::size_t t = 0; t < recon.size(); ++t) {
    FrameMetrics fm;
    fm.psnr_db = psnr(recon[t], gt[t], mv, masked);
    fm.ssim = ssim(recon[t], gt[t], mv, cfg, masked);
    rep.per_frame.push_back(fm);
  }
  const double n = static_cast<double>(rep.per_frame.size());
  for (const auto& fm : rep.per_frame) {
    rep.psnr_mean += fm.psnr_db / n;
    rep.ssim_mean += fm.ssim / n;
  }
  if (rep.per_frame.size() > 1) {
    double vp = 0.0, vs = 0.0;
    for (const auto& fm : rep.per_frame) {
      vp += (fm.psnr_db - rep.psnr_mean) * (fm.psnr_db - rep.psnr_mean);
      vs += (fm.ssim - rep.ssim_mean) * (fm.ssim - rep.ssim_mean);
    }
    rep.psnr_std = std::sqrt(vp / (n - 1.0));
    rep.ssim_std = std::sqrt(vs / (n - 1.0));
  }
  return rep;
}

void write_metrics_csv(const std::string& path, const MetricReport& report) {
  std::string s = "frame,psnr_db,ssim\n";
  for (std::size_t t = 0; t < report.per_frame.size(); ++t) {
    s += std::to_string(t) + "," + fmt_g17(report.per_frame[t].psnr_db) + "," +
         fmt_g17(report.per_frame[t].ssim) + "\n";
  }
  s += "mean," + fmt_g17(report.psnr_mean) + "," + fmt_g17(report.ssim_mean) + "\n";
  s += "std," + fmt_g17(report.psnr_std) + "," + fmt_g17(report.ssim_std) + "\n";
  write_text_file(path, s);
}

}  // namespace xct
