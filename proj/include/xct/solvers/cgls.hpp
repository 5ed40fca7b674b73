#pragma once

#include <vector>

#include "xct/core/grid.hpp"
#include "xct/tomo/projector.hpp"

namespace xct {

struct CglsConfig {
  int max_iters = 20;
  double rel_tol = 1e-6;  // stop when ||A'r|| drops below rel_tol * initial
  double mu = 1.0;        // proximal penalty weight (0 → plain least squares)
};

struct CglsResult {
  Image<double> x;
  std::vector<double> normal_residuals;  // ||A'r|| history, entry 0 = initial
  int iters = 0;
  bool breakdown = false;
};

// Approximately minimizes  1/2 ||W^{1/2}(P x − y)||² + mu/2 ||x − z||²
// via CGLS on the stacked operator [W^{1/2} P; sqrt(mu) I] with data
// [W^{1/2} y; sqrt(mu) z]. weights (W diagonal) and warm_start are optional;
// absent weights mean W = I (same arithmetic path, multiplies by 1.0).
// z may be empty (treated as zero). Breakdown (vanishing search direction)
// returns the current iterate flagged.
CglsResult cgls_xupdate(const Image<double>& y, const ProjectorGeometry& geom,
                        const Image<double>& z, const CglsConfig& cfg,
                        const Image<float>* weights = nullptr,
                        const Image<double>* warm_start = nullptr);

}  // namespace xct
