#include "xct/acquisition/scan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "xct/core/ini.hpp"
#include "xct/core/parallel.hpp"
#include "xct/core/raw_io.hpp"
#include "xct/core/rng.hpp"

namespace xct {

namespace {

std::string frame_file(const std::string& dir, const char* prefix, int i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%04d.%s", prefix, i, ext);
  return dir + "/" + buf;
}

std::string join_g17(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += fmt_g17(v[i]);
  }
  return s;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<double> split_doubles(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> out;
  double v;
  while (is >> v) out.push_back(v);
  return out;
}

std::vector<int> split_ints(const std::string& s) {
  std::istringstream is(s);
  std::vector<int> out;
  int v;
  while (is >> v) out.push_back(v);
  return out;
}

}  // namespace

SinogramStack simulate_scan(const DynamicSequence& seq, const AcquisitionSchedule& sched,
                            int n_det, const ProjectorGeometry& geom) {
  const std::size_t n_proj = sched.entries.size();
  if (n_proj == 0) throw std::invalid_argument("simulate_scan: empty schedule");
  if (seq.frames.size() < n_proj)
    throw std::invalid_argument("simulate_scan: sequence shorter than schedule (need one state per projection)");
  if (n_det < 1) throw std::invalid_argument("simulate_scan: n_det must be >= 1");
  const int h = seq.frames[0].height(), w = seq.frames[0].width();
  for (const auto& f : seq.frames)
    if (f.height() != h || f.width() != w)
      throw std::invalid_argument("simulate_scan: sequence frames differ in shape");
  if ((geom.img_h && geom.img_h != h) || (geom.img_w && geom.img_w != w))
    throw std::invalid_argument("simulate_scan: projector geometry does not match sequence shape");

  SinogramStack st;
  st.n_theta = sched.n_theta;
  st.k_subframes = sched.k_subframes;
  st.n_cycles = sched.n_cycles;
  st.n_det = n_det;
  st.pixel_size = geom.pixel_size > 0 ? geom.pixel_size : seq.pixel_size;
  st.det_spacing = geom.det_spacing > 0 ? geom.det_spacing : st.pixel_size;
  st.step_frac = geom.step_frac;
  st.img_h = h;
  st.img_w = w;

  const int n_frames = sched.n_frames();
  const int g = sched.projections_per_frame();
  st.frames.resize(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t) {
    auto& f = st.frames[static_cast<std::size_t>(t)];
    f.angles.assign(static_cast<std::size_t>(g), 0.0);
    f.proj_indices.assign(static_cast<std::size_t>(g), 0);
    f.data = Image<float>(g, n_det);
    f.gt_index = central_state_index(sched, t);
  }

  ProjectorGeometry base;
  base.img_h = h;
  base.img_w = w;
  base.pixel_size = st.pixel_size;
  base.n_det = n_det;
  base.det_spacing = st.det_spacing;
  base.step_frac = st.step_frac;

  parallel_for(0, static_cast<long>(n_proj), [&](long b, long e) {
    ProjectorGeometry one = base;
    one.angles.resize(1);
    for (long n = b; n < e; ++n) {
      const ScheduleEntry& ent = sched.entries[static_cast<std::size_t>(n)];
      one.angles[0] = ent.theta;
      Image<float> row = radon_forward(seq.frames[static_cast<std::size_t>(n)], one);
      auto& f = st.frames[static_cast<std::size_t>(ent.subframe)];
      const int r = ent.index - ent.subframe * g;
      f.angles[static_cast<std::size_t>(r)] = ent.theta;
      f.proj_indices[static_cast<std::size_t>(r)] = ent.index;
      std::copy(row.row(0), row.row(0) + n_det, f.data.row(r));
    }
  });

  st.gt.reserve(static_cast<std::size_t>(n_frames));
  for (int t = 0; t < n_frames; ++t)
    st.gt.push_back(seq.frames[static_cast<std::size_t>(st.frames[static_cast<std::size_t>(t)].gt_index)]);
  return st;
}

SinogramStack apply_poisson(const SinogramStack& stack, double dose, std::uint64_t seed) {
  if (!(dose > 0.0)) throw std::invalid_argument("apply_poisson: dose must be > 0");
  SinogramStack out = stack;
  out.dose = dose;
  out.noise_seed = seed;
  for (int t = 0; t < out.n_frames(); ++t) {
    auto& f = out.frames[static_cast<std::size_t>(t)];
    f.counts = Image<float>(f.data.height(), f.data.width());
    f.weights = Image<float>(f.data.height(), f.data.width());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t), 0xB0));
    for (int r = 0; r < f.data.height(); ++r) {
      for (int d = 0; d < f.data.width(); ++d) {
        const double p = f.data(r, d);
        const double mu = dose * std::exp(-p);
        long long i = rng.poisson(mu);
        if (i < 1) i = 1;
        f.data(r, d) = static_cast<float>(std::log(dose / static_cast<double>(i)));
        f.counts(r, d) = static_cast<float>(i);
        f.weights(r, d) = static_cast<float>(static_cast<double>(i) / dose);
      }
    }
  }
  return out;
}

SinogramStack inject_ring_bias(const SinogramStack& stack, const std::vector<double>& c) {
  if (static_cast<int>(c.size()) != stack.n_det)
    throw std::invalid_argument("inject_ring_bias: profile length != n_det");
  SinogramStack out = stack;
  out.ring_profile = c;
  for (auto& f : out.frames)
    for (int r = 0; r < f.data.height(); ++r)
      for (int d = 0; d < f.data.width(); ++d)
        f.data(r, d) = static_cast<float>(f.data(r, d) + c[static_cast<std::size_t>(d)]);
  return out;
}

std::vector<double> make_two_bump_profile(int n_det) {
  if (n_det < 1) throw std::invalid_argument("make_two_bump_profile: n_det must be >= 1");
  std::vector<double> c(static_cast<std::size_t>(n_det));
  const double sigma = std::max(1.5, 0.03 * n_det);
  const double p1 = 0.3 * n_det, p2 = 0.7 * n_det;
  double mean = 0.0;
  for (int d = 0; d < n_det; ++d) {
    const double a = (d - p1) / sigma, b = (d - p2) / sigma;
    c[static_cast<std::size_t>(d)] = std::exp(-0.5 * a * a) - 0.7 * std::exp(-0.5 * b * b);
    mean += c[static_cast<std::size_t>(d)];
  }
  mean /= n_det;
  double peak = 0.0;
  for (auto& v : c) {
    v -= mean;
    peak = std::max(peak, std::fabs(v));
  }
  if (peak > 0.0)
    for (auto& v : c) v /= peak;
  return c;
}

double stack_data_max_abs(const SinogramStack& stack) {
  double m = 0.0;
  for (const auto& f : stack.frames)
    for (std::size_t i = 0; i < f.data.size(); ++i)
      m = std::max(m, std::fabs(static_cast<double>(f.data.data()[i])));
  return m;
}

void save_stack(const std::string& dir, const SinogramStack& stack) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<float> data, counts, weights;
  const bool has_counts = stack.dose > 0.0;
  for (const auto& f : stack.frames) {
    data.insert(data.end(), f.data.data(), f.data.data() + f.data.size());
    if (has_counts) {
      counts.insert(counts.end(), f.counts.data(), f.counts.data() + f.counts.size());
      weights.insert(weights.end(), f.weights.data(), f.weights.data() + f.weights.size());
    }
  }
  write_raw_f32(dir + "/data.raw", data.data(), data.size());
  if (has_counts) {
    write_raw_f32(dir + "/counts.raw", counts.data(), counts.size());
    write_raw_f32(dir + "/weights.raw", weights.data(), weights.size());
  }
  for (std::size_t t = 0; t < stack.gt.size(); ++t)
    write_raw_f32(frame_file(dir, "gt", static_cast<int>(t), "raw"), stack.gt[t]);

  std::string m;
  m += "[stack]\n";
  m += "n_theta = " + std::to_string(stack.n_theta) + "\n";
  m += "k_subframes = " + std::to_string(stack.k_subframes) + "\n";
  m += "n_cycles = " + std::to_string(stack.n_cycles) + "\n";
  m += "n_det = " + std::to_string(stack.n_det) + "\n";
  m += "det_spacing = " + fmt_g17(stack.det_spacing) + "\n";
  m += "pixel_size = " + fmt_g17(stack.pixel_size) + "\n";
  m += "step_frac = " + fmt_g17(stack.step_frac) + "\n";
  m += "img_h = " + std::to_string(stack.img_h) + "\n";
  m += "img_w = " + std::to_string(stack.img_w) + "\n";
  m += "dose = " + fmt_g17(stack.dose) + "\n";
  m += "noise_seed = " + std::to_string(stack.noise_seed) + "\n";
  m += "n_frames = " + std::to_string(stack.n_frames()) + "\n";
  m += "n_gt = " + std::to_string(stack.gt.size()) + "\n";
  if (!stack.ring_profile.empty())
    m += "ring_profile = " + join_g17(stack.ring_profile) + "\n";
  for (int t = 0; t < stack.n_frames(); ++t) {
    const auto& f = stack.frames[static_cast<std::size_t>(t)];
    m += "\n[frame" + std::to_string(t) + "]\n";
    m += "gt_index = " + std::to_string(f.gt_index) + "\n";
    m += "proj_indices = " + join_ints(f.proj_indices) + "\n";
    m += "angles = " + join_g17(f.angles) + "\n";
  }
  write_text_file(dir + "/stack_meta.txt", m);
}

SinogramStack load_stack(const std::string& dir) {
  const Ini ini = Ini::parse_file(dir + "/stack_meta.txt");
  SinogramStack st;
  st.n_theta = static_cast<int>(ini.get_int("stack", "n_theta"));
  st.k_subframes = static_cast<int>(ini.get_int("stack", "k_subframes"));
  st.n_cycles = static_cast<int>(ini.get_int("stack", "n_cycles"));
  st.n_det = static_cast<int>(ini.get_int("stack", "n_det"));
  st.det_spacing = ini.get_double("stack", "det_spacing");
  st.pixel_size = ini.get_double("stack", "pixel_size");
  st.step_frac = ini.get_double("stack", "step_frac");
  st.img_h = static_cast<int>(ini.get_int("stack", "img_h"));
  st.img_w = static_cast<int>(ini.get_int("stack", "img_w"));
  st.dose = ini.get_double("stack", "dose");
  st.noise_seed = std::stoull(ini.get_string("stack", "noise_seed"));
  const int n_frames = static_cast<int>(ini.get_int("stack", "n_frames"));
  const int n_gt = static_cast<int>(ini.get_int("stack", "n_gt"));
  if (ini.has("stack", "ring_profile"))
    st.ring_profile = split_doubles(ini.get_string("stack", "ring_profile"));

  st.frames.resize(static_cast<std::size_t>(n_frames));
  std::size_t total = 0;
  for (int t = 0; t < n_frames; ++t) {
    auto& f = st.frames[static_cast<std::size_t>(t)];
    const std::string sec = "frame" + std::to_string(t);
    f.gt_index = static_cast<int>(ini.get_int(sec, "gt_index"));
    f.proj_indices = split_ints(ini.get_string(sec, "proj_indices"));
    f.angles = split_doubles(ini.get_string(sec, "angles"));
    if (f.angles.size() != f.proj_indices.size() || f.angles.empty())
      throw std::runtime_error("load_stack: inconsistent frame metadata in " + sec);
    total += f.angles.size() * static_cast<std::size_t>(st.n_det);
  }

  const std::vector<float> data = read_raw_f32(dir + "/data.raw", total);
  const bool has_counts = st.dose > 0.0;
  std::vector<float> counts, weights;
  if (has_counts) {
    counts = read_raw_f32(dir + "/counts.raw", total);
    weights = read_raw_f32(dir + "/weights.raw", total);
  }
  std::size_t off = 0;
  for (auto& f : st.frames) {
    const int rows = static_cast<int>(f.angles.size());
    f.data = Image<float>(rows, st.n_det);
    std::copy(data.begin() + static_cast<std::ptrdiff_t>(off),
              data.begin() + static_cast<std::ptrdiff_t>(off + f.data.size()), f.data.data());
    if (has_counts) {
      f.counts = Image<float>(rows, st.n_det);
      f.weights = Image<float>(rows, st.n_det);
      std::copy(counts.begin() + static_cast<std::ptrdiff_t>(off),
                counts.begin() + static_cast<std::ptrdiff_t>(off + f.counts.size()),
                f.counts.data());
      std::copy(weights.begin() + static_cast<std::ptrdiff_t>(off),
                weights.begin() + static_cast<std::ptrdiff_t>(off + f.weights.size()),
                f.weights.data());
    }
    off += f.data.size();
  }
  st.gt.reserve(static_cast<std::size_t>(n_gt));
  for (int t = 0; t < n_gt; ++t)
    st.gt.push_back(read_raw_f32_image(frame_file(dir, "gt", t, "raw"), st.img_h, st.img_w));
  return st;
}

}  // namespace xct
