#pragma once

#include <vector>

#include "xct/acquisition/scan.hpp"
#include "xct/core/grid.hpp"

namespace xct {

struct RingEstimatorConfig {
  double huber_delta = 0.0;  // <= 0 → automatic 1.345 × MAD of the residuals
  int irls_iters = 10;
  double smooth_lambda = 0.0;  // 1D Tikhonov along the detector axis, 0 = off
};

// Per-column (detector) robust location of the residual matrix R via Huber
// IRLS, optionally Tikhonov-smoothed across detectors, shifted to zero mean.
std::vector<double> estimate_ring_bias(const Image<double>& residuals,
                                       const RingEstimatorConfig& cfg);

// Stacks y_t − P x_t over all frames into one matrix: rows ordered
// (frame, angle), columns = detector bins. X must hold one image per frame.
Image<double> compute_residuals(const SinogramStack& stack,
                                const std::vector<Image<double>>& x);

// Solves (I + lambda D'D) out = in on a 1D chain (Thomas algorithm), where D
// is the forward-difference operator.
std::vector<double> tikhonov_smooth_1d(const std::vector<double>& in, double lambda);

}  // namespace xct
