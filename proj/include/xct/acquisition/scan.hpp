#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xct/acquisition/schedule.hpp"
#include "xct/core/grid.hpp"
#include "xct/phantom/phase_field.hpp"
#include "xct/tomo/projector.hpp"

namespace xct {

// Measurements owned by one temporal sub-frame: a handful of consecutive
// projections, each taken from a different object state.
struct SinogramFrame {
  std::vector<double> angles;      // per-row projection angle, radians
  std::vector<int> proj_indices;   // global projection indices, acquisition order
  Image<float> data;               // rows = projections, cols = detector bins
  Image<float> counts;             // photon counts (empty when noiseless)
  Image<float> weights;            // WLS weights = counts/dose (empty when noiseless)
  int gt_index = 0;                // object-state index used as ground truth

  ProjectorGeometry geometry(int img_h, int img_w, double pixel_size,
                             double det_spacing, double step_frac) const {
    ProjectorGeometry g;
    g.img_h = img_h;
    g.img_w = img_w;
    g.pixel_size = pixel_size;
    g.n_det = data.width();
    g.det_spacing = det_spacing;
    g.step_frac = step_frac;
    g.angles = angles;
    return g;
  }
};

struct SinogramStack {
  int n_theta = 0;
  int k_subframes = 0;
  int n_cycles = 1;
  int n_det = 0;
  double det_spacing = 0.0;  // resolved, mm
  double pixel_size = 0.0;   // mm
  double step_frac = 0.5;
  int img_h = 0;
  int img_w = 0;
  double dose = 0.0;         // 0 → noiseless
  std::uint64_t noise_seed = 0;
  std::vector<double> ring_profile;        // injected per-detector bias (empty if none)
  std::vector<Image<float>> gt;            // ground-truth attenuation per sub-frame
  std::vector<SinogramFrame> frames;

  int n_frames() const { return static_cast<int>(frames.size()); }
  ProjectorGeometry frame_geometry(int t) const {
    return frames[static_cast<std::size_t>(t)].geometry(img_h, img_w, pixel_size,
                                                        det_spacing, step_frac);
  }
};

// Forward-projects one object state per schedule entry and groups the rows by
// sub-frame. geom supplies pixel_size/det_spacing/step_frac; its angle list is
// ignored. Requires seq to provide at least one state per projection.
SinogramStack simulate_scan(const DynamicSequence& seq, const AcquisitionSchedule& sched,
                            int n_det, const ProjectorGeometry& geom);

// Replaces line integrals p with log(dose/I), I ~ Poisson(dose·exp(−p)) clamped
// to ≥1; stores counts and WLS weights I/dose. Per-frame RNG substreams.
SinogramStack apply_poisson(const SinogramStack& stack, double dose, std::uint64_t seed);

// Adds c[d] to every sinogram row (counts/weights untouched) and records the
// profile in the stack.
SinogramStack inject_ring_bias(const SinogramStack& stack, const std::vector<double>& c);

// Smooth zero-mean, unit-peak test profile: two Gaussian bumps of opposite
// sign at 0.3·n_det and 0.7·n_det.
std::vector<double> make_two_bump_profile(int n_det);

// Largest |value| over all frames' data rows.
double stack_data_max_abs(const SinogramStack& stack);

void save_stack(const std::string& dir, const SinogramStack& stack);
SinogramStack load_stack(const std::string& dir);

}  // namespace xct
