#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "xct/core/grid.hpp"
#include "xct/core/ini.hpp"
#include "xct/metrics/metrics.hpp"

namespace xct::cli {

// Configuration / validation problem → exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses a config file (empty path → empty config, all defaults) and rejects
// unknown sections or keys by name.
Ini load_config(const std::string& path);

void run_phantom(const Ini& cfg, const std::string& config_path, const std::string& out_dir);

void run_scan(const Ini& cfg, const std::string& config_path, const std::string& seq_dir,
              const std::string& out_dir);

void run_reconstruct(const Ini& cfg, const std::string& config_path,
                     const std::vector<std::string>& stack_dirs, const std::string& method,
                     bool wls_flag, const std::string& out_dir);

MetricReport run_metrics(const Ini& cfg, const std::string& config_path,
                         const std::string& recon_dir, const std::string& stack_dir,
                         bool masked_flag, const std::string& out_dir);

void run_experiment(const Ini& cfg, const std::string& config_path, const std::string& out_dir);

// Prints the relative adjointness defect for the geometry; returns 0 when it
// is at or below the float64 certification threshold.
int run_certify_adjoint(int height, int width, int n_angles, int n_det, double pixel_size,
                        double det_spacing, double step_frac, int pairs, std::uint64_t seed);

void run_export_png(const std::string& in_dir, const std::string& gt_dir, double lo, double hi,
                    bool have_range, const std::string& out_dir);

// Reconstruction frames saved by run_reconstruct (any method).
struct ReconFiles {
  int n_slices = 1;
  int n_frames = 0;
  int height = 0;
  int width = 0;
  std::vector<Image<float>> frames;  // index = slice·n_frames + t
};
ReconFiles load_recon(const std::string& dir);

}  // namespace xct::cli
