#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xct/core/grid.hpp"

namespace xct {

// Conserved-order-parameter dynamics on a periodic grid, advanced by a
// semi-implicit spectral scheme: the fourth-order interface term is treated
// implicitly in Fourier space, the double-well chemical term explicitly.
// Double well f(c) = A·c²(1−c)², so f'(c) = A·2c(1−c)(1−2c).
struct ChParams {
  double mobility = 1.0;
  double eps = 1.0;        // gradient-energy coefficient
  double dt = 0.1;
  double well_scale = 1.0; // A above
};

struct PhaseField {
  Image<double> c;
  long step = 0;
};

// c = c0 + uniform noise in [-amp, amp], drawn row-major from the seeded RNG.
// Dims must be powers of two.
PhaseField make_initial_field(int height, int width, double c0, double noise_amp,
                              std::uint64_t seed);

// One semi-implicit spectral step:
//   c_hat' = (c_hat − dt·M·k²·fft(f'(c))) / (1 + dt·M·ε·k⁴),
// with k components 2π·m/N (unit grid spacing). The k=0 mode is untouched, so
// the mean concentration is conserved to FFT round-off.
void ch_step(PhaseField& field, const ChParams& params);

// Per-mode amplification factor of the scheme linearized about c = 0.5
// (f''(0.5) = −well_scale for the double well above).
double ch_growth_factor(double k_squared, const ChParams& params);

// Runs n_steps of ch_step, returning ceil(n_steps/save_every)+1 snapshots:
// the initial state, every save_every-th state, and the final state.
std::vector<PhaseField> simulate_sequence(const PhaseField& init, const ChParams& params,
                                          long n_steps, long save_every);

// Binarized two-phase attenuation map: mu_low where c < threshold, mu_high
// otherwise. Units mm⁻¹.
Image<float> map_attenuation(const Image<double>& c, double threshold, double mu_low,
                             double mu_high);

// Time-ordered attenuation images with physical pixel size and per-frame
// simulation times (step counts × dt).
struct DynamicSequence {
  std::vector<Image<float>> frames;
  std::vector<double> times;
  double pixel_size = 0.003;  // mm
};

// Writes frame_%04d.raw (float32, row-major) plus phantom_meta.txt. si_means,
// when provided, is recorded per frame (one complexity score per frame).
void save_sequence(const std::string& dir, const DynamicSequence& seq,
                   const std::vector<double>& si_means);
DynamicSequence load_sequence(const std::string& dir);

}  // namespace xct
