#pragma once

#include <vector>

#include "xct/core/grid.hpp"

namespace xct {

// Parallel-beam geometry. Rays are sampled at a fixed step along their length
// and gather bilinear image samples; the adjoint scatters the identical
// weights, so the pair is an exact transpose (up to floating-point rounding
// of the dot products, not of the operator itself).
struct ProjectorGeometry {
  int img_h = 0;
  int img_w = 0;
  double pixel_size = 0.003;  // mm
  int n_det = 0;
  double det_spacing = 0.0;   // mm; 0 -> pixel_size
  std::vector<double> angles; // radians in [0, pi)
  double step_frac = 0.5;     // ray sampling step as a fraction of pixel_size

  double spacing() const { return det_spacing > 0.0 ? det_spacing : pixel_size; }
};

// n_det for full sinogram coverage of a width-w image: ceil(sqrt(2)*w) + 1.
int full_coverage_dets(int w);

// Sinogram layout: height = angles.size(), width = n_det.
template <typename T>
Image<T> radon_forward(const Image<T>& img, const ProjectorGeometry& g);

// Exact transpose of radon_forward. Deterministic reduction: rays are
// processed in fixed angle-blocks whose partial images are summed in block
// order, independent of thread count.
template <typename T>
Image<T> radon_adjoint(const Image<T>& sino, const ProjectorGeometry& g);

enum class FbpFilter { ramlak, hann };

// Frequency-domain ramp filtering (projections zero-padded to the next power
// of two >= 2*n_det), back-projection via radon_adjoint, scaled so the result
// approximates the image in attenuation units:
// pi/(2*n_angles) * 1/pixel_size at det_spacing == pixel_size.
template <typename T>
Image<T> fbp(const Image<T>& sino, const ProjectorGeometry& g,
             FbpFilter filter = FbpFilter::ramlak);

}  // namespace xct
