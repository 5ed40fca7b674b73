#include "xct/phantom/phase_field.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "xct/core/fft.hpp"
#include "xct/core/ini.hpp"
#include "xct/core/raw_io.hpp"
#include "xct/core/rng.hpp"

namespace xct {
namespace {

void check_field(const PhaseField& f) {
  if (!is_pow2(f.c.height()) || !is_pow2(f.c.width()))
    throw std::invalid_argument("phase field dims must be powers of two");
  for (std::size_t i = 0; i < f.c.size(); ++i)
    if (!std::isfinite(f.c.data()[i]))
      throw std::invalid_argument("phase field contains non-finite values");
}

inline double dwell_prime(double c, double a) {
  // d/dc [A c²(1−c)²] = A·2c(1−c)(1−2c)
  return a * 2.0 * c * (1.0 - c) * (1.0 - 2.0 * c);
}

// k for row/col index j on an N-point periodic axis with unit spacing.
inline double wavenumber(int j, int n) {
  const int m = (j <= n / 2) ? j : j - n;
  return 2.0 * M_PI * static_cast<double>(m) / static_cast<double>(n);
}

}  // namespace

PhaseField make_initial_field(int height, int width, double c0, double noise_amp,
                              std::uint64_t seed) {
  if (!is_pow2(height) || !is_pow2(width))
    throw std::invalid_argument("phase field dims must be powers of two");
  PhaseField f;
  f.c = Image<double>(height, width);
  Rng rng(derive_seed(seed, 0x1D17));
  for (std::size_t i = 0; i < f.c.size(); ++i)
    f.c.data()[i] = c0 + noise_amp * rng.uniform(-1.0, 1.0);
  return f;
}

double ch_growth_factor(double k_squared, const ChParams& p) {
  const double f2 = -p.well_scale;  // f''(0.5)
  return (1.0 - p.dt * p.mobility * k_squared * f2) /
         (1.0 + p.dt * p.mobility * p.eps * k_squared * k_squared);
}

void ch_step(PhaseField& field, const ChParams& p) {
  if (p.dt <= 0.0) throw std::invalid_argument("ch_step: dt must be positive");
  if (p.mobility <= 0.0 || p.eps <= 0.0)
    throw std::invalid_argument("ch_step: mobility and eps must be positive");
  check_field(field);

  const int h = field.c.height();
  const int w = field.c.width();
  const std::size_t n = field.c.size();

  std::vector<std::complex<double>> chat(n), fhat(n);
  for (std::size_t i = 0; i < n; ++i) {
    chat[i] = field.c.data()[i];
    fhat[i] = dwell_prime(field.c.data()[i], p.well_scale);
  }
  fft2_pow2(chat.data(), h, w, false);
  fft2_pow2(fhat.data(), h, w, false);

  for (int y = 0; y < h; ++y) {
    const double ky = wavenumber(y, h);
    for (int x = 0; x < w; ++x) {
      const double kx = wavenumber(x, w);
      const double k2 = kx * kx + ky * ky;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      chat[i] = (chat[i] - p.dt * p.mobility * k2 * fhat[i]) /
                (1.0 + p.dt * p.mobility * p.eps * k2 * k2);
    }
  }

  fft2_pow2(chat.data(), h, w, true);
  for (std::size_t i = 0; i < n; ++i) field.c.data()[i] = chat[i].real();
  ++field.step;
}

std::vector<PhaseField> simulate_sequence(const PhaseField& init, const ChParams& params,
                                          long n_steps, long save_every) {
  if (save_every <= 0) throw std::invalid_argument("simulate_sequence: save_every must be >= 1");
  if (n_steps < 0) throw std::invalid_argument("simulate_sequence: n_steps must be >= 0");
  check_field(init);

  std::vector<PhaseField> out;
  out.reserve(static_cast<std::size_t>(n_steps / save_every) + 2);
  PhaseField cur = init;
  out.push_back(cur);
  for (long s = 1; s <= n_steps; ++s) {
    ch_step(cur, params);
    if (s % save_every == 0 || s == n_steps) out.push_back(cur);
  }
  return out;
}

Image<float> map_attenuation(const Image<double>& c, double threshold, double mu_low,
                             double mu_high) {
  if (mu_low >= mu_high) throw std::invalid_argument("map_attenuation: need mu_low < mu_high");
  Image<float> out(c.height(), c.width());
  for (std::size_t i = 0; i < c.size(); ++i)
    out.data()[i] = (c.data()[i] < threshold) ? static_cast<float>(mu_low)
                                              : static_cast<float>(mu_high);
  return out;
}

void save_sequence(const std::string& dir, const DynamicSequence& seq,
                   const std::vector<double>& si_means) {
  if (seq.frames.empty()) throw std::invalid_argument("save_sequence: empty sequence");
  if (seq.times.size() != seq.frames.size())
    throw std::invalid_argument("save_sequence: times/frames length mismatch");
  if (!si_means.empty() && si_means.size() != seq.frames.size())
    throw std::invalid_argument("save_sequence: si_means length mismatch");
  std::filesystem::create_directories(dir);
  char name[32];
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    std::snprintf(name, sizeof(name), "frame_%04zu.raw", i);
    write_raw_f32(dir + "/" + name, seq.frames[i]);
  }
  std::string m = "[sequence]\n";
  m += "n_frames = " + std::to_string(seq.frames.size()) + "\n";
  m += "height = " + std::to_string(seq.frames[0].height()) + "\n";
  m += "width = " + std::to_string(seq.frames[0].width()) + "\n";
  m += "pixel_size = " + fmt_g17(seq.pixel_size) + "\n";
  std::string times, sis;
  for (std::size_t i = 0; i < seq.times.size(); ++i) {
    if (i) times += ' ';
    times += fmt_g17(seq.times[i]);
  }
  m += "times = " + times + "\n";
  if (!si_means.empty()) {
    for (std::size_t i = 0; i < si_means.size(); ++i) {
      if (i) sis += ' ';
      sis += fmt_g17(si_means[i]);
    }
    m += "si_means = " + sis + "\n";
  }
  write_text_file(dir + "/phantom_meta.txt", m);
}

DynamicSequence load_sequence(const std::string& dir) {
  const Ini ini = Ini::parse_file(dir + "/phantom_meta.txt");
  DynamicSequence seq;
  const long n = ini.get_int("sequence", "n_frames");
  const int h = static_cast<int>(ini.get_int("sequence", "height"));
  const int w = static_cast<int>(ini.get_int("sequence", "width"));
  seq.pixel_size = ini.get_double("sequence", "pixel_size");
  std::istringstream ts(ini.get_string("sequence", "times"));
  double v;
  while (ts >> v) seq.times.push_back(v);
  if (static_cast<long>(seq.times.size()) != n)
    throw std::runtime_error("load_sequence: times count does not match n_frames");
  char name[32];
  for (long i = 0; i < n; ++i) {
    std::snprintf(name, sizeof(name), "frame_%04ld.raw", i);
    seq.frames.push_back(read_raw_f32_image(dir + "/" + name, h, w));
  }
  return seq;
}

}  // namespace xct
