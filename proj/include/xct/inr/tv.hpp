#pragma once

#include <cstddef>

namespace xct {

// Charbonnier-smoothed total variation and pairwise penalties. All gradient
// outputs ACCUMULATE (callers zero the buffers), so multiple loss terms can
// share one gradient image. Losses are exact zeros on constant/equal inputs
// (the ε offset is subtracted).

// Mean over h·w pixels of √(Δx²+ε²) + √(Δy²+ε²) − 2ε with forward
// differences; out-of-range differences contribute nothing. grad may be null.
template <typename T>
double tv_spatial(const T* img, int h, int w, double eps, T* grad);

// Mean over n of √((a−b)²+ε²) − ε. grad_a/grad_b may each be null; passing
// grad_b = nullptr detaches b (temporal anchor), passing both couples the
// pair symmetrically (axial neighbors).
template <typename T>
double charbonnier_pair(const T* a, const T* b, std::size_t n, double eps, T* grad_a,
                        T* grad_b);

extern template double tv_spatial<float>(const float*, int, int, double, float*);
extern template double tv_spatial<double>(const double*, int, int, double, double*);
extern template double charbonnier_pair<float>(const float*, const float*, std::size_t, double,
                                               float*, float*);
extern template double charbonnier_pair<double>(const double*, const double*, std::size_t,
                                                double, double*, double*);

}  // namespace xct
