#include "xct/acquisition/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include "xct/core/grid.hpp"

namespace xct {

namespace {

void validate_lattice(int n_theta, int k) {
  if (n_theta < 1) throw std::invalid_argument("schedule: n_theta must be >= 1");
  if (k < 1) throw std::invalid_argument("schedule: k must be >= 1");
  if (!is_pow2(static_cast<std::size_t>(k)))
    throw std::invalid_argument("schedule: k must be a power of two");
  if (n_theta % k != 0) throw std::invalid_argument("schedule: k must divide n_theta");
}

int log2_exact(int k) {
  int b = 0;
  while ((1 << b) < k) ++b;
  return b;
}

}  // namespace

std::uint32_t bit_reverse(std::uint32_t v, int bits) {
  std::uint32_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (v & 1u);
    v >>= 1;
  }
  return r;
}

double interlaced_angle(long n, int n_theta, int k) {
  validate_lattice(n_theta, k);
  if (n < 0) throw std::invalid_argument("schedule: projection index must be >= 0");
  const long m = n % n_theta;
  const int per_group = n_theta / k;
  const int bits = log2_exact(k);
  const std::uint32_t group = static_cast<std::uint32_t>((m * k) / n_theta) %
                              static_cast<std::uint32_t>(k);
  const long j = (m % per_group) * k + bit_reverse(group, bits);
  return static_cast<double>(j) * M_PI / n_theta;
}

AcquisitionSchedule build_schedule(int n_theta, int k, int n_cycles) {
  validate_lattice(n_theta, k);
  if (n_cycles < 1) throw std::invalid_argument("schedule: n_cycles must be >= 1");
  AcquisitionSchedule s;
  s.n_theta = n_theta;
  s.k_subframes = k;
  s.n_cycles = n_cycles;
  s.entries.reserve(static_cast<std::size_t>(n_theta) * n_cycles);
  const long total = static_cast<long>(n_theta) * n_cycles;
  for (long n = 0; n < total; ++n) {
    ScheduleEntry e;
    e.index = static_cast<int>(n);
    e.theta = interlaced_angle(n, n_theta, k);
    e.subframe = static_cast<int>((n * k) / n_theta);
    s.entries.push_back(e);
  }
  return s;
}

int central_state_index(const AcquisitionSchedule& s, int subframe) {
  if (subframe < 0 || subframe >= s.n_frames())
    throw std::invalid_argument("schedule: subframe out of range");
  const int g = s.projections_per_frame();
  return subframe * g + (g - 1) / 2;
}

}  // namespace xct
