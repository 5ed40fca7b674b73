#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "xct/acquisition/scan.hpp"
#include "xct/acquisition/schedule.hpp"
#include "xct/core/rng.hpp"
#include "xct/phantom/phase_field.hpp"
#include "xct/tomo/projector.hpp"

using namespace xct;

TEST_CASE("bit reversal") {
  CHECK(bit_reverse(0, 3) == 0);
  CHECK(bit_reverse(1, 3) == 4);
  CHECK(bit_reverse(2, 3) == 2);
  CHECK(bit_reverse(3, 3) == 6);
  CHECK(bit_reverse(6, 3) == 3);
  CHECK(bit_reverse(0, 0) == 0);
  CHECK(bit_reverse(5, 1) == 1);  // only the low bit participates
}

TEST_CASE("the (4,2) interlace sequence") {
  const double expected[4] = {0.0, M_PI / 2, M_PI / 4, 3 * M_PI / 4};
  for (int n = 0; n < 4; ++n)
    CHECK(interlaced_angle(n, 4, 2) == doctest::Approx(expected[n]).epsilon(1e-15));
  // Periodic continuation into the second rotation.
  CHECK(interlaced_angle(4, 4, 2) == doctest::Approx(0.0).scale(1.0));
  CHECK(interlaced_angle(7, 4, 2) == doctest::Approx(3 * M_PI / 4));
}

TEST_CASE("interlace validation") {
  CHECK_THROWS_AS(interlaced_angle(0, 12, 3), std::invalid_argument);   // K not a power of two
  CHECK_THROWS_AS(interlaced_angle(0, 12, 8), std::invalid_argument);   // K does not divide N
  CHECK_THROWS_AS(interlaced_angle(-1, 8, 2), std::invalid_argument);   // negative index
  CHECK_THROWS_AS(build_schedule(16, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_schedule(16, 32, 1), std::invalid_argument);
  CHECK_NOTHROW(build_schedule(16, 16, 1));
  CHECK_NOTHROW(build_schedule(16, 1, 2));
}

TEST_CASE("every cycle visits the exact angle lattice once") {
  for (int n_theta : {4, 16, 64}) {
    for (int k : {1, 2, 4, 8}) {
      if (n_theta % k != 0) continue;
      const int cycles = 2;
      AcquisitionSchedule s = build_schedule(n_theta, k, cycles);
      CHECK(static_cast<int>(s.entries.size()) == n_theta * cycles);
      CHECK(s.n_frames() == k * cycles);
      CHECK(s.projections_per_frame() == n_theta / k);

      for (int c = 0; c < cycles; ++c) {
        std::vector<double> angles;
        for (int j = 0; j < n_theta; ++j) {
          const auto& e = s.entries[static_cast<std::size_t>(c * n_theta + j)];
          CHECK(e.index == c * n_theta + j);
          angles.push_back(e.theta);
        }
        std::sort(angles.begin(), angles.end());
        for (int j = 0; j < n_theta; ++j)
          CHECK(angles[static_cast<std::size_t>(j)] ==
                doctest::Approx(j * M_PI / n_theta).epsilon(1e-12).scale(1.0));
      }

      // Each sub-frame owns exactly n_theta/k consecutive acquisition indices.
      const int g = n_theta / k;
      for (const auto& e : s.entries) CHECK(e.subframe == e.index / g);
    }
  }
}

TEST_CASE("central ground-truth state of a sub-frame") {
  AcquisitionSchedule s = build_schedule(8, 2, 2);  // groups of 4
  CHECK(central_state_index(s, 0) == 1);  // (4−1)/2 = 1 (tie toward earlier)
  CHECK(central_state_index(s, 1) == 5);
  CHECK(central_state_index(s, 2) == 9);
  AcquisitionSchedule s2 = build_schedule(9, 1, 1);  // odd group of 9
  CHECK(central_state_index(s2, 0) == 4);
}

namespace {

DynamicSequence make_test_sequence(int n_frames, int hw, std::uint64_t seed) {
  DynamicSequence seq;
  seq.pixel_size = 0.003;
  Rng rng(seed);
  for (int t = 0; t < n_frames; ++t) {
    Image<float> f(hw, hw);
    for (auto& v : f.vec()) v = static_cast<float>(rng.uniform() * 0.4);
    seq.frames.push_back(f);
    seq.times.push_back(t);
  }
  return seq;
}

ProjectorGeometry base_geometry(int hw) {
  ProjectorGeometry g;
  g.img_h = hw;
  g.img_w = hw;
  g.pixel_size = 0.003;
  g.n_det = hw;
  g.det_spacing = 0.0;
  g.step_frac = 0.5;
  return g;
}

}  // namespace

TEST_CASE("scan rows are projections of the per-entry object state") {
  const int hw = 8;
  DynamicSequence seq = make_test_sequence(8, hw, 42);
  AcquisitionSchedule sched = build_schedule(4, 2, 2);
  SinogramStack stack = simulate_scan(seq, sched, hw, base_geometry(hw));

  CHECK(stack.n_frames() == 4);
  CHECK(stack.n_theta == 4);
  CHECK(stack.k_subframes == 2);
  CHECK(static_cast<int>(stack.gt.size()) == 4);

  for (int t = 0; t < stack.n_frames(); ++t) {
    const SinogramFrame& fr = stack.frames[static_cast<std::size_t>(t)];
    CHECK(fr.data.height() == 2);
    CHECK(fr.data.width() == hw);
    CHECK(fr.gt_index == t * 2 + 0);  // groups of 2 → central = first (tie earlier)
    for (int r = 0; r < fr.data.height(); ++r) {
      const int n = fr.proj_indices[static_cast<std::size_t>(r)];
      ProjectorGeometry g1 = base_geometry(hw);
      g1.angles = {fr.angles[static_cast<std::size_t>(r)]};
      Image<float> want = radon_forward(seq.frames[static_cast<std::size_t>(n)], g1);
      for (int d = 0; d < hw; ++d) CHECK(fr.data(r, d) == doctest::Approx(want(0, d)));
    }
  }

  // Ground truth snapshots are the central states of each group.
  for (int t = 0; t < 4; ++t)
    for (std::size_t i = 0; i < stack.gt[static_cast<std::size_t>(t)].size(); ++i)
      CHECK(stack.gt[static_cast<std::size_t>(t)].data()[i] ==
            seq.frames[static_cast<std::size_t>(t * 2)].data()[i]);

  // Too few object states must be rejected.
  DynamicSequence shortseq = make_test_sequence(7, hw, 43);
  CHECK_THROWS_AS(simulate_scan(shortseq, sched, hw, base_geometry(hw)),
                  std::invalid_argument);
}

TEST_CASE("poisson noise: planes, determinism, high-dose consistency") {
  const int hw = 16;
  DynamicSequence seq = make_test_sequence(8, hw, 7);
  AcquisitionSchedule sched = build_schedule(8, 2, 1);
  SinogramStack clean = simulate_scan(seq, sched, hw, base_geometry(hw));
  CHECK(clean.frames[0].counts.empty());
  CHECK(clean.frames[0].weights.empty());

  SinogramStack noisy = apply_poisson(clean, 1e6, 123);
  SinogramStack noisy2 = apply_poisson(clean, 1e6, 123);
  SinogramStack other = apply_poisson(clean, 1e6, 124);
  CHECK(noisy.dose == 1e6);
  bool identical = true, differs = false;
  double max_abs = 0.0;
  for (int t = 0; t < noisy.n_frames(); ++t) {
    const auto& a = noisy.frames[static_cast<std::size_t>(t)];
    const auto& b = noisy2.frames[static_cast<std::size_t>(t)];
    const auto& c = other.frames[static_cast<std::size_t>(t)];
    const auto& cl = clean.frames[static_cast<std::size_t>(t)];
    REQUIRE_FALSE(a.counts.empty());
    REQUIRE(a.weights.size() == a.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      identical = identical && a.data.data()[i] == b.data.data()[i];
      differs = differs || a.data.data()[i] != c.data.data()[i];
      max_abs = std::max<double>(max_abs, std::abs(a.data.data()[i] - cl.data.data()[i]));
      CHECK(a.weights.data()[i] == doctest::Approx(a.counts.data()[i] / 1e6));
      CHECK(a.counts.data()[i] >= 1.0f);
    }
  }
  CHECK(identical);
  CHECK(differs);
  CHECK(max_abs < 0.01);  // ~1e6 photons → per-ray σ ≈ 1e−3 in log space
}

TEST_CASE("ring bias injection is additive on data only") {
  const int hw = 8;
  DynamicSequence seq = make_test_sequence(4, hw, 3);
  AcquisitionSchedule sched = build_schedule(4, 1, 1);
  SinogramStack clean = simulate_scan(seq, sched, hw, base_geometry(hw));
  std::vector<double> c(static_cast<std::size_t>(hw));
  for (int d = 0; d < hw; ++d) c[static_cast<std::size_t>(d)] = 0.01 * d - 0.035;
  SinogramStack biased = inject_ring_bias(clean, c);
  REQUIRE(biased.ring_profile.size() == c.size());
  for (int t = 0; t < clean.n_frames(); ++t)
    for (int r = 0; r < clean.frames[static_cast<std::size_t>(t)].data.height(); ++r)
      for (int d = 0; d < hw; ++d)
        CHECK(biased.frames[static_cast<std::size_t>(t)].data(r, d) ==
              doctest::Approx(clean.frames[static_cast<std::size_t>(t)].data(r, d) +
                              c[static_cast<std::size_t>(d)]));
}

TEST_CASE("two-bump profile: zero mean, unit peak, bump placement") {
  for (int n : {32, 64, 200}) {
    std::vector<double> p = make_two_bump_profile(n);
    REQUIRE(static_cast<int>(p.size()) == n);
    double mean = 0.0, peak = 0.0;
    for (double v : p) {
      mean += v;
      peak = std::max(peak, std::abs(v));
    }
    mean /= n;
    CHECK(std::abs(mean) <= 1e-12);
    CHECK(peak == doctest::Approx(1.0));
    // positive bump near 0.3n, negative near 0.7n
    const int ip = static_cast<int>(0.3 * n), in = static_cast<int>(0.7 * n);
    CHECK(p[static_cast<std::size_t>(ip)] > 0.5);
    CHECK(p[static_cast<std::size_t>(in)] < -0.3);
  }
}

TEST_CASE("stack save/load round-trip is bitwise") {
  const int hw = 8;
  DynamicSequence seq = make_test_sequence(8, hw, 21);
  AcquisitionSchedule sched = build_schedule(8, 4, 1);
  SinogramStack stack = simulate_scan(seq, sched, hw, base_geometry(hw));
  stack = apply_poisson(stack, 5e4, 99);
  std::vector<double> prof = make_two_bump_profile(hw);
  for (double& v : prof) v *= 0.02;
  stack = inject_ring_bias(stack, prof);

  const std::string dir =
      (std::filesystem::temp_directory_path() / "xct_test_stack").string();
  std::filesystem::create_directories(dir);
  save_stack(dir, stack);
  SinogramStack back = load_stack(dir);

  CHECK(back.n_theta == stack.n_theta);
  CHECK(back.k_subframes == stack.k_subframes);
  CHECK(back.n_cycles == stack.n_cycles);
  CHECK(back.n_det == stack.n_det);
  CHECK(back.det_spacing == stack.det_spacing);
  CHECK(back.pixel_size == stack.pixel_size);
  CHECK(back.step_frac == stack.step_frac);
  CHECK(back.img_h == stack.img_h);
  CHECK(back.img_w == stack.img_w);
  CHECK(back.dose == stack.dose);
  CHECK(back.noise_seed == stack.noise_seed);
  REQUIRE(back.ring_profile.size() == stack.ring_profile.size());
  for (std::size_t i = 0; i < prof.size(); ++i)
    CHECK(back.ring_profile[i] == stack.ring_profile[i]);
  REQUIRE(back.n_frames() == stack.n_frames());
  REQUIRE(back.gt.size() == stack.gt.size());
  for (std::size_t t = 0; t < stack.gt.size(); ++t)
    for (std::size_t i = 0; i < stack.gt[t].size(); ++i)
      CHECK(back.gt[t].data()[i] == stack.gt[t].data()[i]);
  for (int t = 0; t < stack.n_frames(); ++t) {
    const auto& a = stack.frames[static_cast<std::size_t>(t)];
    const auto& b = back.frames[static_cast<std::size_t>(t)];
    CHECK(b.gt_index == a.gt_index);
    REQUIRE(b.angles.size() == a.angles.size());
    for (std::size_t i = 0; i < a.angles.size(); ++i) {
      CHECK(b.angles[i] == a.angles[i]);
      CHECK(b.proj_indices[i] == a.proj_indices[i]);
    }
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      CHECK(b.data.data()[i] == a.data.data()[i]);
      CHECK(b.counts.data()[i] == a.counts.data()[i]);
      CHECK(b.weights.data()[i] == a.weights.data()[i]);
    }
  }
}

TEST_CASE("stack_data_max_abs") {
  const int hw = 8;
  DynamicSequence seq = make_test_sequence(4, hw, 5);
  AcquisitionSchedule sched = build_schedule(4, 1, 1);
  SinogramStack stack = simulate_scan(seq, sched, hw, base_geometry(hw));
  double want = 0.0;
  for (const auto& f : stack.frames)
    for (float v : f.data.vec()) want = std::max(want, static_cast<double>(std::abs(v)));
  CHECK(stack_data_max_abs(stack) == want);
  CHECK(want > 0.0);
}
