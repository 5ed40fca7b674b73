#pragma once

#include <vector>

#include "xct/core/rng.hpp"

namespace xct {

// Coarse sampling lattice for the network: one point per s×s cell, at the
// cell center plus (when rng is given) a per-point uniform jitter in
// (−s/2, s/2) pixels on each axis. Output is row-major over cells, two
// values per point (x first, then y), normalized to [−1,1] via
// u = 2(p+0.5)/N − 1 and clamped. s must divide both h and w. With s=1 and
// no rng the result is the exact pixel-center lattice.
template <typename T>
std::vector<T> jittered_grid(int h, int w, int s, Rng* rng);

extern template std::vector<float> jittered_grid<float>(int, int, int, Rng*);
extern template std::vector<double> jittered_grid<double>(int, int, int, Rng*);

}  // namespace xct
