#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xct/acquisition/scan.hpp"
#include "xct/acquisition/schedule.hpp"
#include "xct/admm/reconstruct.hpp"
#include "xct/core/raw_io.hpp"
#include "xct/core/rng.hpp"
#include "xct/phantom/phase_field.hpp"
#include "xct/phantom/spatial_info.hpp"
#include "xct/solvers/ring.hpp"
#include "xct/tomo/projector.hpp"

namespace fs = std::filesystem;

namespace xct::cli {
namespace {

constexpr const char* kVersion = "xct 1.0.0";

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

void require(bool ok, const std::string& msg) {
  if (!ok) config_fail(msg);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Content hash of a directory tree: FNV-1a over "relpath:filehash" lines in
// sorted path order, so it is independent of traversal order.
std::uint64_t hash_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) {
    acc += fs::relative(f, dir).generic_string();
    acc += ':';
    acc += hex64(fnv1a_file(f));
    acc += '\n';
  }
  return fnv1a_bytes(acc.data(), acc.size());
}

// ---------------------------------------------------------------------------
// Config schema

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"phantom",
       {"height", "width", "c0", "noise_amp", "mobility", "eps", "dt", "well_scale", "n_steps",
        "save_every", "seed", "threshold", "mu_low", "mu_high", "pixel_size", "binarize"}},
      {"scan",
       {"n_theta", "k", "n_cycles", "n_det", "det_spacing", "step_frac", "dose", "noise_seed",
        "ring", "ring_amplitude"}},
      {"reconstruct",
       {"outer_iters", "inr_updates", "cgls_iters", "cgls_tol", "mu", "lambda_s", "lambda_t",
        "lambda_a", "eps_tv", "k_s", "k_t", "downsample", "wls", "ring_correct", "ring_estimate",
        "huber_delta", "irls_iters", "smooth_lambda", "axial_batch", "mapping_size",
        "feature_scale", "hidden", "layers", "omega0", "lr", "beta1", "beta2", "eps_adam",
        "lr_decay", "seed", "fbp_filter"}},
      {"metrics", {"masked", "window", "sigma", "k1", "k2"}},
      {"experiment", {"sweep_n_theta", "sweep_dose", "methods"}},
  };
  return s;
}

void validate_schema(const Ini& cfg) {
  const auto& s = schema();
  for (const auto& e : cfg.entries()) {
    auto sec = s.find(e.section);
    if (sec == s.end()) config_fail("unknown config section [" + e.section + "]");
    if (!sec->second.count(e.key)) config_fail("unknown config key " + e.section + "." + e.key);
  }
}

// ---------------------------------------------------------------------------
// Resolved-config / manifest writers

class ResolvedConfig {
 public:
  void set_s(const std::string& sec, const std::string& key, const std::string& v) {
    auto it = std::find_if(sections_.begin(), sections_.end(),
                           [&](const auto& p) { return p.first == sec; });
    if (it == sections_.end()) {
      sections_.push_back({sec, {}});
      it = std::prev(sections_.end());
    }
    it->second.push_back({key, v});
  }
  void set_i(const std::string& sec, const std::string& key, long long v) {
    set_s(sec, key, std::to_string(v));
  }
  void set_u(const std::string& sec, const std::string& key, std::uint64_t v) {
    set_s(sec, key, std::to_string(static_cast<unsigned long long>(v)));
  }
  void set_d(const std::string& sec, const std::string& key, double v) {
    set_s(sec, key, fmt_g17(v));
  }
  void set_b(const std::string& sec, const std::string& key, bool v) {
    set_s(sec, key, v ? "true" : "false");
  }

  void write(const std::string& out_dir) const {
    std::string text;
    for (const auto& [sec, kvs] : sections_) {
      text += "[" + sec + "]\n";
      for (const auto& [k, v] : kvs) text += k + " = " + v + "\n";
      text += "\n";
    }
    write_text_file(join_path(out_dir, "resolved_config.ini"), text);
  }

 private:
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections_;
};

void write_manifest(const std::string& out_dir, const std::string& config_path,
                    const std::vector<std::pair<std::string, std::string>>& input_dirs) {
  std::string text;
  text += std::string("version = ") + kVersion + "\n";
  if (config_path.empty()) {
    text += "config_file = <none>\n";
    text += "config_hash = " + hex64(fnv1a_bytes("", 0)) + "\n";
  } else {
    text += "config_file = " + config_path + "\n";
    text += "config_hash = " + hex64(fnv1a_file(config_path)) + "\n";
  }
  for (const auto& [name, dir] : input_dirs) {
    text += "input_" + name + " = " + dir + "\n";
    text += "input_" + name + "_hash = " + hex64(hash_dir(dir)) + "\n";
  }
  write_text_file(join_path(out_dir, "manifest.txt"), text);
}

// ---------------------------------------------------------------------------
// Small shared helpers

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    std::size_t b = cur.find_first_not_of(" \t");
    std::size_t e = cur.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
  }
  return out;
}

void write_ring_csv(const std::string& path, const std::vector<double>& bias) {
  std::string text = "detector,bias\n";
  for (std::size_t d = 0; d < bias.size(); ++d)
    text += std::to_string(d) + "," + fmt_g17(bias[d]) + "\n";
  write_text_file(path, text);
}

std::string frame_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "recon_%04d.raw", t);
  return buf;
}

std::string slice_frame_name(int z, int t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "recon_z%03d_t%04d.raw", z, t);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

Ini load_config(const std::string& path) {
  if (path.empty()) return Ini();
  Ini cfg = Ini::parse_file(path);
  validate_schema(cfg);
  return cfg;
}

void run_phantom(const Ini& cfg, const std::string& config_path, const std::string& out_dir) {
  const int height = static_cast<int>(cfg.get_int("phantom", "height", 64));
  const int width = static_cast<int>(cfg.get_int("phantom", "width", 64));
  const double c0 = cfg.get_double("phantom", "c0", 0.5);
  const double noise_amp = cfg.get_double("phantom", "noise_amp", 0.05);
  ChParams params;
  params.mobility = cfg.get_double("phantom", "mobility", 1.0);
  params.eps = cfg.get_double("phantom", "eps", 1.0);
  params.dt = cfg.get_double("phantom", "dt", 0.1);
  params.well_scale = cfg.get_double("phantom", "well_scale", 1.0);
  const long n_steps = cfg.get_int("phantom", "n_steps", 1500);
  const long save_every = cfg.get_int("phantom", "save_every", 100);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("phantom", "seed", 1234));
  const double threshold = cfg.get_double("phantom", "threshold", 0.5);
  const double mu_low = cfg.get_double("phantom", "mu_low", 0.0750);
  const double mu_high = cfg.get_double("phantom", "mu_high", 0.4303);
  const double pixel_size = cfg.get_double("phantom", "pixel_size", 0.003);
  const std::string binarize = cfg.get_string("phantom", "binarize", "midpoint");
  require(binarize == "midpoint" || binarize == "otsu",
          "phantom.binarize must be 'midpoint' or 'otsu'");
  require(n_steps >= 0 && save_every > 0, "phantom.n_steps/save_every out of range");

  ensure_dir(out_dir);

  PhaseField init = make_initial_field(height, width, c0, noise_amp, seed);
  std::vector<PhaseField> states = simulate_sequence(init, params, n_steps, save_every);

  DynamicSequence seq;
  seq.pixel_size = pixel_size;
  std::vector<double> si_means;
  seq.frames.reserve(states.size());
  for (const auto& st : states) {
    seq.frames.push_back(map_attenuation(st.c, threshold, mu_low, mu_high));
    seq.times.push_back(static_cast<double>(st.step) * params.dt);
    Image<double> bin = binarize == "otsu" ? binarize_otsu(st.c) : binarize_midpoint(st.c);
    si_means.push_back(spatial_information(bin).si_mean);
  }
  save_sequence(out_dir, seq, si_means);

  ResolvedConfig rc;
  rc.set_i("phantom", "height", height);
  rc.set_i("phantom", "width", width);
  rc.set_d("phantom", "c0", c0);
  rc.set_d("phantom", "noise_amp", noise_amp);
  rc.set_d("phantom", "mobility", params.mobility);
  rc.set_d("phantom", "eps", params.eps);
  rc.set_d("phantom", "dt", params.dt);
  rc.set_d("phantom", "well_scale", params.well_scale);
  rc.set_i("phantom", "n_steps", n_steps);
  rc.set_i("phantom", "save_every", save_every);
  rc.set_u("phantom", "seed", seed);
  rc.set_d("phantom", "threshold", threshold);
  rc.set_d("phantom", "mu_low", mu_low);
  rc.set_d("phantom", "mu_high", mu_high);
  rc.set_d("phantom", "pixel_size", pixel_size);
  rc.set_s("phantom", "binarize", binarize);
  rc.write(out_dir);
  write_manifest(out_dir, config_path, {});
}

void run_scan(const Ini& cfg, const std::string& config_path, const std::string& seq_dir,
              const std::string& out_dir) {
  const int n_theta = static_cast<int>(cfg.get_int("scan", "n_theta", 64));
  const int k = static_cast<int>(cfg.get_int("scan", "k", 8));
  const int n_cycles = static_cast<int>(cfg.get_int("scan", "n_cycles", 1));
  const int n_det_cfg = static_cast<int>(cfg.get_int("scan", "n_det", 0));
  const double det_spacing = cfg.get_double("scan", "det_spacing", 0.0);
  const double step_frac = cfg.get_double("scan", "step_frac", 0.5);
  const double dose = cfg.get_double("scan", "dose", 0.0);
  const std::uint64_t noise_seed =
      static_cast<std::uint64_t>(cfg.get_int("scan", "noise_seed", 5678));
  const std::string ring = cfg.get_string("scan", "ring", "none");
  const double ring_amplitude = cfg.get_double("scan", "ring_amplitude", 0.05);
  require(ring == "none" || ring == "two-bump", "scan.ring must be 'none' or 'two-bump'");
  require(dose >= 0.0, "scan.dose must be >= 0");

  DynamicSequence seq = load_sequence(seq_dir);
  require(!seq.frames.empty(), "sequence directory has no frames: " + seq_dir);
  const int img_h = seq.frames.front().height();
  const int img_w = seq.frames.front().width();
  int n_det = n_det_cfg;
  if (n_det == 0) n_det = img_w;
  if (n_det == -1) n_det = full_coverage_dets(img_w);
  require(n_det > 0, "scan.n_det must be -1, 0, or positive");

  AcquisitionSchedule sched = build_schedule(n_theta, k, n_cycles);
  require(static_cast<long>(seq.frames.size()) >= static_cast<long>(sched.entries.size()),
          "sequence has " + std::to_string(seq.frames.size()) + " frames but the schedule needs " +
              std::to_string(sched.entries.size()) + " object states (one per projection)");

  ProjectorGeometry geom;
  geom.img_h = img_h;
  geom.img_w = img_w;
  geom.pixel_size = seq.pixel_size;
  geom.n_det = n_det;
  geom.det_spacing = det_spacing;
  geom.step_frac = step_frac;

  SinogramStack stack = simulate_scan(seq, sched, n_det, geom);
  if (dose > 0.0) stack = apply_poisson(stack, dose, noise_seed);
  if (ring == "two-bump") {
    std::vector<double> profile = make_two_bump_profile(n_det);
    const double amp = ring_amplitude * stack_data_max_abs(stack);
    for (double& v : profile) v *= amp;
    stack = inject_ring_bias(stack, profile);
  }

  ensure_dir(out_dir);
  save_stack(out_dir, stack);

  ResolvedConfig rc;
  rc.set_i("scan", "n_theta", n_theta);
  rc.set_i("scan", "k", k);
  rc.set_i("scan", "n_cycles", n_cycles);
  rc.set_i("scan", "n_det", n_det);
  rc.set_d("scan", "det_spacing", det_spacing);
  rc.set_d("scan", "step_frac", step_frac);
  rc.set_d("scan", "dose", dose);
  rc.set_u("scan", "noise_seed", noise_seed);
  rc.set_s("scan", "ring", ring);
  rc.set_d("scan", "ring_amplitude", ring_amplitude);
  rc.write(out_dir);
  write_manifest(out_dir, config_path, {{"sequence", seq_dir}});
}

namespace {

ReconstructionConfig recon_config_from(const Ini& cfg, bool wls_flag) {
  ReconstructionConfig rc;
  rc.outer_iters = static_cast<int>(cfg.get_int("reconstruct", "outer_iters", 30));
  rc.inr_updates_per_iter = static_cast<int>(cfg.get_int("reconstruct", "inr_updates", 50));
  rc.cgls.max_iters = static_cast<int>(cfg.get_int("reconstruct", "cgls_iters", 20));
  rc.cgls.rel_tol = cfg.get_double("reconstruct", "cgls_tol", 1e-6);
  rc.cgls.mu = cfg.get_double("reconstruct", "mu", 1.0);
  rc.tv.lambda_s = cfg.get_double("reconstruct", "lambda_s", 1e-4);
  rc.tv.lambda_t = cfg.get_double("reconstruct", "lambda_t", 1e-4);
  rc.tv.lambda_a = cfg.get_double("reconstruct", "lambda_a", 1e-3);
  rc.tv.eps_tv = cfg.get_double("reconstruct", "eps_tv", 1e-6);
  rc.tv.k_s = static_cast<int>(cfg.get_int("reconstruct", "k_s", 2));
  rc.tv.k_t = static_cast<int>(cfg.get_int("reconstruct", "k_t", 2));
  rc.downsample = static_cast<int>(cfg.get_int("reconstruct", "downsample", 2));
  rc.wls = cfg.get_bool("reconstruct", "wls", false) || wls_flag;
  const bool ring_correct = cfg.get_bool("reconstruct", "ring_correct", false);
  rc.ring.enabled = ring_correct;
  rc.ring.estimate = cfg.get_bool("reconstruct", "ring_estimate", ring_correct);
  rc.ring.estimator.huber_delta = cfg.get_double("reconstruct", "huber_delta", 0.0);
  rc.ring.estimator.irls_iters = static_cast<int>(cfg.get_int("reconstruct", "irls_iters", 10));
  rc.ring.estimator.smooth_lambda = cfg.get_double("reconstruct", "smooth_lambda", 0.0);
  rc.axial_batch = static_cast<int>(cfg.get_int("reconstruct", "axial_batch", 4));
  rc.mapping_size = static_cast<int>(cfg.get_int("reconstruct", "mapping_size", 256));
  rc.feature_scale = cfg.get_double("reconstruct", "feature_scale", 5.0);
  rc.hidden = static_cast<int>(cfg.get_int("reconstruct", "hidden", 256));
  rc.n_layers = static_cast<int>(cfg.get_int("reconstruct", "layers", 3));
  rc.omega0 = cfg.get_double("reconstruct", "omega0", 30.0);
  rc.adam.lr = cfg.get_double("reconstruct", "lr", 1e-3);
  rc.adam.beta1 = cfg.get_double("reconstruct", "beta1", 0.9);
  rc.adam.beta2 = cfg.get_double("reconstruct", "beta2", 0.999);
  rc.adam.eps = cfg.get_double("reconstruct", "eps_adam", 1e-8);
  rc.lr_decay = cfg.get_double("reconstruct", "lr_decay", 0.98);
  rc.seed = static_cast<std::uint64_t>(cfg.get_int("reconstruct", "seed", 0));
  return rc;
}

void write_resolved_recon(const Ini& cfg, const ReconstructionConfig& rc,
                          const std::string& method, const std::string& fbp_filter,
                          const std::string& out_dir) {
  ResolvedConfig out;
  out.set_s("reconstruct", "method", method);
  out.set_i("reconstruct", "outer_iters", rc.outer_iters);
  out.set_i("reconstruct", "inr_updates", rc.inr_updates_per_iter);
  out.set_i("reconstruct", "cgls_iters", rc.cgls.max_iters);
  out.set_d("reconstruct", "cgls_tol", rc.cgls.rel_tol);
  out.set_d("reconstruct", "mu", rc.cgls.mu);
  out.set_d("reconstruct", "lambda_s", rc.tv.lambda_s);
  out.set_d("reconstruct", "lambda_t", rc.tv.lambda_t);
  out.set_d("reconstruct", "lambda_a", rc.tv.lambda_a);
  out.set_d("reconstruct", "eps_tv", rc.tv.eps_tv);
  out.set_i("reconstruct", "k_s", rc.tv.k_s);
  out.set_i("reconstruct", "k_t", rc.tv.k_t);
  out.set_i("reconstruct", "downsample", rc.downsample);
  out.set_b("reconstruct", "wls", rc.wls);
  out.set_b("reconstruct", "ring_correct", rc.ring.enabled);
  out.set_b("reconstruct", "ring_estimate", rc.ring.estimate);
  out.set_d("reconstruct", "huber_delta", rc.ring.estimator.huber_delta);
  out.set_i("reconstruct", "irls_iters", rc.ring.estimator.irls_iters);
  out.set_d("reconstruct", "smooth_lambda", rc.ring.estimator.smooth_lambda);
  out.set_i("reconstruct", "axial_batch", rc.axial_batch);
  out.set_i("reconstruct", "mapping_size", rc.mapping_size);
  out.set_d("reconstruct", "feature_scale", rc.feature_scale);
  out.set_i("reconstruct", "hidden", rc.hidden);
  out.set_i("reconstruct", "layers", rc.n_layers);
  out.set_d("reconstruct", "omega0", rc.omega0);
  out.set_d("reconstruct", "lr", rc.adam.lr);
  out.set_d("reconstruct", "beta1", rc.adam.beta1);
  out.set_d("reconstruct", "beta2", rc.adam.beta2);
  out.set_d("reconstruct", "eps_adam", rc.adam.eps);
  out.set_d("reconstruct", "lr_decay", rc.lr_decay);
  out.set_u("reconstruct", "seed", rc.seed);
  out.set_s("reconstruct", "fbp_filter", fbp_filter);
  (void)cfg;
  out.write(out_dir);
}

}  // namespace

void run_reconstruct(const Ini& cfg, const std::string& config_path,
                     const std::vector<std::string>& stack_dirs, const std::string& method,
                     bool wls_flag, const std::string& out_dir) {
  require(method == "fbp" || method == "admm-inr",
          "method must be 'fbp' or 'admm-inr', got '" + method + "'");
  require(!stack_dirs.empty(), "at least one stack directory is required");

  std::vector<SinogramStack> stacks;
  stacks.reserve(stack_dirs.size());
  for (const auto& d : stack_dirs) stacks.push_back(load_stack(d));

  ReconstructionConfig rc = recon_config_from(cfg, wls_flag);
  const std::string fbp_filter = cfg.get_string("reconstruct", "fbp_filter", "ramlak");
  require(fbp_filter == "ramlak" || fbp_filter == "hann",
          "reconstruct.fbp_filter must be 'ramlak' or 'hann'");

  if (rc.wls) {
    for (const auto& st : stacks)
      for (const auto& f : st.frames)
        require(!f.counts.empty() && !f.weights.empty(), "WLS requires photon counts");
  }

  ensure_dir(out_dir);

  std::string meta = "[recon]\n";
  meta += "type = " + method + "\n";

  if (method == "fbp") {
    require(stacks.size() == 1, "method=fbp takes exactly one stack directory");
    const SinogramStack& st = stacks.front();
    const FbpFilter filt = fbp_filter == "hann" ? FbpFilter::hann : FbpFilter::ramlak;
    for (int t = 0; t < st.n_frames(); ++t) {
      Image<float> img = fbp(st.frames[static_cast<std::size_t>(t)].data, st.frame_geometry(t),
                             filt);
      write_raw_f32(join_path(out_dir, frame_name(t)), img);
    }
    meta += "n_slices = 1\n";
    meta += "n_frames = " + std::to_string(st.n_frames()) + "\n";
    meta += "height = " + std::to_string(st.img_h) + "\n";
    meta += "width = " + std::to_string(st.img_w) + "\n";
  } else if (stacks.size() == 1) {
    AdmmResult res = admm_reconstruct(stacks.front(), rc);
    for (int t = 0; t < res.n_frames; ++t)
      write_raw_f32(join_path(out_dir, frame_name(t)), res.frames[static_cast<std::size_t>(t)]);
    write_history_csv(join_path(out_dir, "history.csv"), res.history);
    save_model(join_path(out_dir, "model.ckpt"), res.encoder, res.mlp);
    if (!res.ring_estimate.empty())
      write_ring_csv(join_path(out_dir, "ring_estimate.csv"), res.ring_estimate);
    meta += "n_slices = 1\n";
    meta += "n_frames = " + std::to_string(res.n_frames) + "\n";
    meta += "height = " + std::to_string(stacks.front().img_h) + "\n";
    meta += "width = " + std::to_string(stacks.front().img_w) + "\n";
    meta += "best_iter = " + std::to_string(res.best_iter) + "\n";
  } else {
    Admm4dResult res = reconstruct_4d(stacks, rc);
    for (int z = 0; z < res.n_slices; ++z)
      for (int t = 0; t < res.n_frames; ++t)
        write_raw_f32(join_path(out_dir, slice_frame_name(z, t)), res.frame(z, t));
    std::string starts;
    for (std::size_t b = 0; b < res.batches.size(); ++b) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "history_batch%02zu.csv", b);
      write_history_csv(join_path(out_dir, buf), res.batches[b].history);
      std::snprintf(buf, sizeof(buf), "model_batch%02zu.ckpt", b);
      save_model(join_path(out_dir, buf), res.batches[b].encoder, res.batches[b].mlp);
      if (!res.batches[b].ring_estimate.empty()) {
        std::snprintf(buf, sizeof(buf), "ring_estimate_batch%02zu.csv", b);
        write_ring_csv(join_path(out_dir, buf), res.batches[b].ring_estimate);
      }
      if (!starts.empty()) starts += ",";
      starts += std::to_string(res.batch_starts[b]);
    }
    meta += "n_slices = " + std::to_string(res.n_slices) + "\n";
    meta += "n_frames = " + std::to_string(res.n_frames) + "\n";
    meta += "height = " + std::to_string(stacks.front().img_h) + "\n";
    meta += "width = " + std::to_string(stacks.front().img_w) + "\n";
    meta += "n_batches = " + std::to_string(res.batches.size()) + "\n";
    meta += "batch_starts = " + starts + "\n";
    for (std::size_t b = 0; b < res.batches.size(); ++b) {
      char key[48];
      std::snprintf(key, sizeof(key), "best_iter_batch%02zu", b);
      meta += std::string(key) + " = " + std::to_string(res.batches[b].best_iter) + "\n";
    }
  }
  write_text_file(join_path(out_dir, "recon_meta.txt"), meta);

  write_resolved_recon(cfg, rc, method, fbp_filter, out_dir);
  std::vector<std::pair<std::string, std::string>> inputs;
  for (std::size_t i = 0; i < stack_dirs.size(); ++i)
    inputs.push_back({"stack" + std::to_string(i), stack_dirs[i]});
  write_manifest(out_dir, config_path, inputs);
}

ReconFiles load_recon(const std::string& dir) {
  Ini meta = Ini::parse_file(join_path(dir, "recon_meta.txt"));
  ReconFiles rec;
  rec.n_slices = static_cast<int>(meta.get_int("recon", "n_slices"));
  rec.n_frames = static_cast<int>(meta.get_int("recon", "n_frames"));
  rec.height = static_cast<int>(meta.get_int("recon", "height"));
  rec.width = static_cast<int>(meta.get_int("recon", "width"));
  rec.frames.reserve(static_cast<std::size_t>(rec.n_slices) * rec.n_frames);
  for (int z = 0; z < rec.n_slices; ++z)
    for (int t = 0; t < rec.n_frames; ++t) {
      const std::string name = rec.n_slices == 1 ? frame_name(t) : slice_frame_name(z, t);
      rec.frames.push_back(read_raw_f32_image(join_path(dir, name), rec.height, rec.width));
    }
  return rec;
}

MetricReport run_metrics(const Ini& cfg, const std::string& config_path,
                         const std::string& recon_dir, const std::string& stack_dir,
                         bool masked_flag, const std::string& out_dir) {
  ReconFiles rec = load_recon(recon_dir);
  require(rec.n_slices == 1, "metrics compares single-slice reconstructions");
  SinogramStack stack = load_stack(stack_dir);
  require(rec.n_frames == stack.n_frames(), "reconstruction has " + std::to_string(rec.n_frames) +
                                                " frames but the stack has " +
                                                std::to_string(stack.n_frames()));

  const bool masked = cfg.get_bool("metrics", "masked", false) || masked_flag;
  SsimConfig scfg;
  scfg.window = static_cast<int>(cfg.get_int("metrics", "window", 11));
  scfg.sigma = cfg.get_double("metrics", "sigma", 1.5);
  scfg.k1 = cfg.get_double("metrics", "k1", 0.01);
  scfg.k2 = cfg.get_double("metrics", "k2", 0.03);

  MetricReport report = evaluate_sequence(rec.frames, stack.gt, masked, scfg);

  ensure_dir(out_dir);
  write_metrics_csv(join_path(out_dir, "metrics.csv"), report);

  ResolvedConfig rcfg;
  rcfg.set_b("metrics", "masked", masked);
  rcfg.set_i("metrics", "window", scfg.window);
  rcfg.set_d("metrics", "sigma", scfg.sigma);
  rcfg.set_d("metrics", "k1", scfg.k1);
  rcfg.set_d("metrics", "k2", scfg.k2);
  rcfg.write(out_dir);
  write_manifest(out_dir, config_path,
                 {{"recon", recon_dir}, {"stack", stack_dir}});
  return report;
}

void run_experiment(const Ini& cfg, const std::string& config_path, const std::string& out_dir) {
  require(!config_path.empty(), "experiment requires a config file");
  const auto t_start = std::chrono::steady_clock::now();

  const int base_n_theta = static_cast<int>(cfg.get_int("scan", "n_theta", 64));
  const double base_dose = cfg.get_double("scan", "dose", 0.0);
  const int k = static_cast<int>(cfg.get_int("scan", "k", 8));

  std::vector<int> n_thetas;
  for (const auto& tok :
       split_csv(cfg.get_string("experiment", "sweep_n_theta", std::to_string(base_n_theta)))) {
    require(!tok.empty(), "experiment.sweep_n_theta has an empty entry");
    try {
      n_thetas.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      config_fail("experiment.sweep_n_theta: not an integer: '" + tok + "'");
    }
  }
  std::vector<double> doses;
  for (const auto& tok :
       split_csv(cfg.get_string("experiment", "sweep_dose", fmt_g17(base_dose)))) {
    require(!tok.empty(), "experiment.sweep_dose has an empty entry");
    try {
      doses.push_back(std::stod(tok));
    } catch (const std::exception&) {
      config_fail("experiment.sweep_dose: not a number: '" + tok + "'");
    }
  }
  std::vector<std::string> methods = split_csv(cfg.get_string("experiment", "methods",
                                                              "fbp,admm-inr"));
  for (const auto& m : methods)
    require(m == "fbp" || m == "admm-inr",
            "experiment.methods entries must be 'fbp' or 'admm-inr', got '" + m + "'");

  ensure_dir(out_dir);
  const std::string phantom_dir = join_path(out_dir, "phantom");
  run_phantom(cfg, config_path, phantom_dir);

  const std::string base_text = read_text_file(config_path);

  std::string table = "n_theta,k,dose,method,psnr_mean,psnr_std,ssim_mean,ssim_std,status\n";
  for (int nt : n_thetas) {
    for (double dose : doses) {
      std::string dose_label = fmt_g17(dose);
      dose_label.erase(std::remove(dose_label.begin(), dose_label.end(), '+'),
                       dose_label.end());
      char ebuf[64];
      std::snprintf(ebuf, sizeof(ebuf), "nt%04d_dose%s", nt, dose_label.c_str());
      const std::string entry_dir = join_path(out_dir, ebuf);
      ensure_dir(entry_dir);

      // Derived per-entry config: the sweep overrides appended last so they
      // win, the file itself kept on disk so the chain can be replayed by
      // hand with the individual subcommands.
      const std::string entry_cfg_path = join_path(entry_dir, "config.ini");
      std::string text = base_text;
      text += "\n[scan]\nn_theta = " + std::to_string(nt) + "\ndose = " + fmt_g17(dose) + "\n";
      write_text_file(entry_cfg_path, text);
      const Ini entry_cfg = load_config(entry_cfg_path);

      const std::string scan_dir = join_path(entry_dir, "scan");
      bool scan_ok = true;
      std::string scan_err;
      try {
        run_scan(entry_cfg, entry_cfg_path, phantom_dir, scan_dir);
      } catch (const std::exception& e) {
        scan_ok = false;
        scan_err = e.what();
      }

      for (const auto& method : methods) {
        const std::string row_head = std::to_string(nt) + "," + std::to_string(k) + "," +
                                     fmt_g17(dose) + "," + method + ",";
        if (!scan_ok) {
          std::fprintf(stderr, "[experiment] %s %s: scan failed: %s\n", ebuf, method.c_str(),
                       scan_err.c_str());
          table += row_head + "nan,nan,nan,nan,failed\n";
          continue;
        }
        try {
          const std::string recon_dir = join_path(entry_dir, "recon_" + method);
          const std::string metrics_dir = join_path(entry_dir, "metrics_" + method);
          run_reconstruct(entry_cfg, entry_cfg_path, {scan_dir}, method, false, recon_dir);
          MetricReport rep =
              run_metrics(entry_cfg, entry_cfg_path, recon_dir, scan_dir, false, metrics_dir);
          table += row_head + fmt_g17(rep.psnr_mean) + "," + fmt_g17(rep.psnr_std) + "," +
                   fmt_g17(rep.ssim_mean) + "," + fmt_g17(rep.ssim_std) + ",ok\n";
        } catch (const std::exception& e) {
          std::fprintf(stderr, "[experiment] %s %s: failed: %s\n", ebuf, method.c_str(),
                       e.what());
          table += row_head + "nan,nan,nan,nan,failed\n";
        }
      }
    }
  }
  write_text_file(join_path(out_dir, "experiment_table.csv"), table);

  ResolvedConfig rcfg;
  {
    std::string nts, dss, ms;
    for (std::size_t i = 0; i < n_thetas.size(); ++i)
      nts += (i ? "," : "") + std::to_string(n_thetas[i]);
    for (std::size_t i = 0; i < doses.size(); ++i) dss += (i ? "," : "") + fmt_g17(doses[i]);
    for (std::size_t i = 0; i < methods.size(); ++i) ms += (i ? "," : "") + methods[i];
    rcfg.set_s("experiment", "sweep_n_theta", nts);
    rcfg.set_s("experiment", "sweep_dose", dss);
    rcfg.set_s("experiment", "methods", ms);
  }
  rcfg.write(out_dir);
  write_manifest(out_dir, config_path, {});

  const double minutes =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count() / 60.0;
  if (minutes > 30.0)
    std::fprintf(stderr, "[experiment] warning: sweep took %.1f minutes (budget 30)\n", minutes);
}

int run_certify_adjoint(int height, int width, int n_angles, int n_det, double pixel_size,
                        double det_spacing, double step_frac, int pairs, std::uint64_t seed) {
  require(height > 0 && width > 0 && n_angles > 0 && pairs > 0, "geometry out of range");
  ProjectorGeometry g;
  g.img_h = height;
  g.img_w = width;
  g.pixel_size = pixel_size;
  g.n_det = n_det == 0 ? width : (n_det == -1 ? full_coverage_dets(width) : n_det);
  g.det_spacing = det_spacing;
  g.step_frac = step_frac;
  g.angles.resize(static_cast<std::size_t>(n_angles));
  for (int j = 0; j < n_angles; ++j)
    g.angles[static_cast<std::size_t>(j)] = static_cast<double>(j) * M_PI / n_angles;

  double max_defect = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(p)));
    Image<double> x(height, width);
    for (auto& v : x.vec()) v = rng.normal();
    Image<double> y(n_angles, g.n_det);
    for (auto& v : y.vec()) v = rng.normal();

    Image<double> px = radon_forward(x, g);
    Image<double> pty = radon_adjoint(y, g);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) lhs += px.data()[i] * y.data()[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.data()[i] * pty.data()[i];
    const double denom = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    max_defect = std::max(max_defect, std::abs(lhs - rhs) / denom);
  }

  constexpr double kThreshold = 1e-10;
  std::printf("geometry: %dx%d image, %d angles, %d detectors\n", height, width, n_angles,
              g.n_det);
  std::printf("max relative adjoint defect over %d pairs: %s\n", pairs,
              fmt_g17(max_defect).c_str());
  std::printf("threshold: %s -> %s\n", fmt_g17(kThreshold).c_str(),
              max_defect <= kThreshold ? "PASS" : "FAIL");
  return max_defect <= kThreshold ? 0 : 1;
}

void run_export_png(const std::string& in_dir, const std::string& gt_dir, double lo, double hi,
                    bool have_range, const std::string& out_dir) {
  // The input directory self-describes: reconstruction output or phantom
  // sequence. Sinogram stacks export their ground-truth frames.
  std::vector<Image<float>> frames;
  std::vector<std::string> names;
  auto has = [](const std::string& dir, const char* f) { return fs::exists(join_path(dir, f)); };

  if (has(in_dir, "recon_meta.txt")) {
    ReconFiles rec = load_recon(in_dir);
    frames = std::move(rec.frames);
    for (int z = 0; z < rec.n_slices; ++z)
      for (int t = 0; t < rec.n_frames; ++t) {
        char buf[48];
        if (rec.n_slices == 1)
          std::snprintf(buf, sizeof(buf), "frame_%04d.png", t);
        else
          std::snprintf(buf, sizeof(buf), "recon_z%03d_t%04d.png", z, t);
        names.push_back(buf);
      }
  } else if (has(in_dir, "phantom_meta.txt")) {
    DynamicSequence seq = load_sequence(in_dir);
    frames = std::move(seq.frames);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "frame_%04zu.png", t);
      names.push_back(buf);
    }
  } else if (has(in_dir, "stack_meta.txt")) {
    SinogramStack stack = load_stack(in_dir);
    frames = std::move(stack.gt);
    for (std::size_t t = 0; t < frames.size(); ++t) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "frame_%04zu.png", t);
      names.push_back(buf);
    }
  } else {
    config_fail("no recon_meta.txt, phantom_meta.txt, or stack_meta.txt in " + in_dir);
  }
  require(!frames.empty(), "nothing to export in " + in_dir);

  std::string norm_source;
  if (have_range) {
    norm_source = "explicit";
  } else {
    std::vector<const Image<float>*> ref;
    std::vector<Image<float>> gt_frames;
    if (!gt_dir.empty()) {
      if (has(gt_dir, "stack_meta.txt")) {
        SinogramStack stack = load_stack(gt_dir);
        gt_frames = std::move(stack.gt);
      } else if (has(gt_dir, "phantom_meta.txt")) {
        DynamicSequence seq = load_sequence(gt_dir);
        gt_frames = std::move(seq.frames);
      } else {
        config_fail("--gt directory has no stack_meta.txt or phantom_meta.txt: " + gt_dir);
      }
      for (const auto& f : gt_frames) ref.push_back(&f);
      norm_source = "ground-truth";
    } else {
      for (const auto& f : frames) ref.push_back(&f);
      norm_source = "input";
    }
    lo = std::numeric_limits<float>::max();
    hi = std::numeric_limits<float>::lowest();
    for (const auto* f : ref)
      for (float v : f->vec()) {
        lo = std::min<double>(lo, v);
        hi = std::max<double>(hi, v);
      }
    if (hi <= lo) hi = lo + 1.0;
  }

  ensure_dir(out_dir);
  for (std::size_t i = 0; i < frames.size(); ++i)
    write_png16(join_path(out_dir, names[i]), frames[i], static_cast<float>(lo),
                static_cast<float>(hi));

  std::string meta = "[export]\n";
  meta += "lo = " + fmt_g17(lo) + "\n";
  meta += "hi = " + fmt_g17(hi) + "\n";
  meta += "normalization = " + norm_source + "\n";
  meta += "n_images = " + std::to_string(frames.size()) + "\n";
  meta += "source = " + in_dir + "\n";
  write_text_file(join_path(out_dir, "export_meta.txt"), meta);
}

}  // namespace xct::cli
