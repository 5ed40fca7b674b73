#pragma once

#include <cstdint>
#include <vector>

namespace xct {

// One projection event: global index n, its angle, and the temporal
// sub-frame that owns it.
struct ScheduleEntry {
  int index = 0;
  double theta = 0.0;
  int subframe = 0;
};

struct AcquisitionSchedule {
  int n_theta = 0;   // distinct lattice angles per rotation
  int k_subframes = 0;  // temporal groups per rotation (power of two, divides n_theta)
  int n_cycles = 1;
  std::vector<ScheduleEntry> entries;  // n_theta * n_cycles, in acquisition order

  int n_frames() const { return k_subframes * n_cycles; }
  int projections_per_frame() const { return n_theta / k_subframes; }
};

// Reverses the lowest `bits` bits of v.
std::uint32_t bit_reverse(std::uint32_t v, int bits);

// Interlaced angle of projection n within one rotation:
//   theta_n = [(n mod N/K)*K + Br(floor(nK/N) mod K)] * pi/N.
// Requires K a power of two and K | N; n is taken modulo N.
double interlaced_angle(long n, int n_theta, int k);

AcquisitionSchedule build_schedule(int n_theta, int k, int n_cycles);

// Index of the object state used as ground truth for subframe t: the central
// projection of the group, ties broken toward the earlier state.
int central_state_index(const AcquisitionSchedule& s, int subframe);

}  // namespace xct
