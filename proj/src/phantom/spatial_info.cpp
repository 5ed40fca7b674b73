#include "xct/phantom/spatial_info.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace xct {
namespace {

inline double at_clamped(const Image<double>& img, int y, int x) {
  y = std::clamp(y, 0, img.height() - 1);
  x = std::clamp(x, 0, img.width() - 1);
  return img(y, x);
}

}  // namespace

SpatialInfo spatial_information(const Image<double>& b) {
  if (b.height() < 3 || b.width() < 3)
    throw std::invalid_argument("spatial_information: image must be at least 3x3");
  SpatialInfo out;
  out.si_map = Image<double>(b.height(), b.width());
  double sum = 0.0;
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      const double p00 = at_clamped(b, y - 1, x - 1), p01 = at_clamped(b, y - 1, x),
                   p02 = at_clamped(b, y - 1, x + 1);
      const double p10 = at_clamped(b, y, x - 1), p12 = at_clamped(b, y, x + 1);
      const double p20 = at_clamped(b, y + 1, x - 1), p21 = at_clamped(b, y + 1, x),
                   p22 = at_clamped(b, y + 1, x + 1);
      const double sh = (p02 + 2.0 * p12 + p22) - (p00 + 2.0 * p10 + p20);
      const double sv = (p20 + 2.0 * p21 + p22) - (p00 + 2.0 * p01 + p02);
      const double mag = std::sqrt(sh * sh + sv * sv);
      out.si_map(y, x) = mag;
      sum += mag;
    }
  }
  out.si_mean = sum / static_cast<double>(b.size());
  return out;
}

Image<double> binarize_midpoint(const Image<double>& img) {
  double lo = img.data()[0], hi = img.data()[0];
  for (std::size_t i = 0; i < img.size(); ++i) {
    lo = std::min(lo, img.data()[i]);
    hi = std::max(hi, img.data()[i]);
  }
  const double t = 0.5 * (lo + hi);
  Image<double> out(img.height(), img.width());
  if (hi == lo) return out;  // constant input -> all zeros
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = img.data()[i] >= t ? 1.0 : 0.0;
  return out;
}

Image<double> binarize_otsu(const Image<double>& img) {
  double lo = img.data()[0], hi = img.data()[0];
  for (std::size_t i = 0; i < img.size(); ++i) {
    lo = std::min(lo, img.data()[i]);
    hi = std::max(hi, img.data()[i]);
  }
  Image<double> out(img.height(), img.width());
  if (hi == lo) return out;

  constexpr int kBins = 256;
  std::vector<std::int64_t> hist(kBins, 0);
  const double scale = (kBins - 1) / (hi - lo);
  for (std::size_t i = 0; i < img.size(); ++i) {
    int bin = static_cast<int>((img.data()[i] - lo) * scale);
    bin = std::clamp(bin, 0, kBins - 1);
    ++hist[bin];
  }

  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int i = 0; i < kBins; ++i) sum_all += i * static_cast<double>(hist[i]);

  double best_between = -1.0;
  int best_bin = 0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < kBins - 1; ++t) {
    w0 += static_cast<double>(hist[t]);
    if (w0 == 0.0) continue;
    const double w1 = total - w0;
    if (w1 == 0.0) break;
    sum0 += t * static_cast<double>(hist[t]);
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best_between) {
      best_between = between;
      best_bin = t;
    }
  }
  // Class 0 owns every value falling in the winning bin, so the continuous
  // cut sits at the start of the next bin.
  const double thresh = lo + (best_bin + 1) / scale;
  for (std::size_t i = 0; i < img.size(); ++i) out.data()[i] = img.data()[i] >= thresh ? 1.0 : 0.0;
  return out;
}

}  // namespace xct
