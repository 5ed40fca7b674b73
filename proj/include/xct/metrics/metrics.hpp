#pragma once

#include <string>
#include <vector>

#include "xct/core/grid.hpp"

namespace xct {

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// 10·log10(max_val²/MSE); identical images → +inf. masked restricts the MSE
// to the inscribed circle (center ((w−1)/2,(h−1)/2), radius min(h,w)/2).
double psnr(const Image<float>& x, const Image<float>& ref, double max_val,
            bool masked = false);

// Mean SSIM with a Gaussian window. Unmasked: separable filtering over all
// fully-interior window positions. Masked: direct evaluation at circle-interior
// centers with window taps restricted to the circle and weights renormalized —
// pixels outside the circle are never read.
double ssim(const Image<float>& x, const Image<float>& ref, double max_val,
            const SsimConfig& cfg = SsimConfig(), bool masked = false);

struct FrameMetrics {
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<FrameMetrics> per_frame;
  double psnr_mean = 0.0, psnr_std = 0.0;
  double ssim_mean = 0.0, ssim_std = 0.0;
  double max_val = 0.0;  // dynamic range: max over ground-truth frames
  bool masked = false;
};

// Per-frame PSNR/SSIM of recon vs gt plus mean and sample std (n−1).
MetricReport evaluate_sequence(const std::vector<Image<float>>& recon,
                               const std::vector<Image<float>>& gt, bool masked = false,
                               const SsimConfig& cfg = SsimConfig());

// One row per frame, then mean and std rows.
void write_metrics_csv(const std::string& path, const MetricReport& report);

}  // namespace xct
