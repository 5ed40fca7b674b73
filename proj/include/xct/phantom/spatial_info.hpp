#pragma once

#include "xct/core/grid.hpp"

namespace xct {

struct SpatialInfo {
  Image<double> si_map;  // per-pixel Sobel gradient magnitude
  double si_mean = 0.0;  // mean over all pixels
};

// Image-complexity score: 3x3 Sobel gradient magnitude, replicate padding at
// borders, averaged over all pixels. The caller passes an already-binarized
// image (see binarize_midpoint/binarize_otsu); for a sequence, keep the max
// si_mean over frames. Rejects images smaller than 3x3.
SpatialInfo spatial_information(const Image<double>& binarized);

// 0/1 threshold at the midpoint of min/max (constant images map to all-zero).
Image<double> binarize_midpoint(const Image<double>& img);

// 0/1 threshold chosen by Otsu's method on a 256-bin histogram.
Image<double> binarize_otsu(const Image<double>& img);

}  // namespace xct
