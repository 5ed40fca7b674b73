#include "xct/core/rng.hpp"

namespace xct {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t id0, std::uint64_t id1,
                          std::uint64_t id2) {
  SplitMix64 sm(base);
  std::uint64_t s = sm.next();
  s ^= 0x9E3779B97F4A7C15ull * (id0 + 1);
  SplitMix64 sm0(s);
  s = sm0.next() ^ (0xC2B2AE3D27D4EB4Full * (id1 + 1));
  SplitMix64 sm1(s);
  s = sm1.next() ^ (0x165667B19E3779F9ull * (id2 + 1));
  SplitMix64 sm2(s);
  return sm2.next();
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0,1] so log() is finite.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace xct
