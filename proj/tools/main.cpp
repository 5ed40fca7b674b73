#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pipeline.hpp"

namespace {

int dispatch(int argc, char** argv) {
  CLI::App app{"Time-interlaced dynamic CT: phantom simulation, scanning, and reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* phantom = app.add_subcommand("phantom", "Simulate an evolving two-phase phantom");
  phantom->add_option("--config", config_path, "INI config file");
  phantom->add_option("--out", out_dir, "output directory")->required();

  std::string seq_dir;
  auto* scan = app.add_subcommand("scan", "Acquire an interlaced sinogram stack of a sequence");
  scan->add_option("--config", config_path, "INI config file");
  scan->add_option("--sequence", seq_dir, "phantom sequence directory")->required();
  scan->add_option("--out", out_dir, "output directory")->required();

  std::vector<std::string> stack_dirs;
  std::string method = "admm-inr";
  bool wls_flag = false;
  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct a sinogram stack");
  reconstruct->add_option("--config", config_path, "INI config file");
  reconstruct->add_option("--stack", stack_dirs, "stack directories (several = axial slices)")
      ->required();
  reconstruct->add_option("--method", method, "fbp or admm-inr");
  reconstruct->add_flag("--wls", wls_flag, "weighted least-squares data term");
  reconstruct->add_option("--out", out_dir, "output directory")->required();

  std::string recon_dir, stack_dir;
  bool masked_flag = false;
  auto* metrics = app.add_subcommand("metrics", "Score a reconstruction against ground truth");
  metrics->add_option("--config", config_path, "INI config file");
  metrics->add_option("--recon", recon_dir, "reconstruction directory")->required();
  metrics->add_option("--stack", stack_dir, "stack directory holding ground truth")->required();
  metrics->add_flag("--masked", masked_flag, "restrict to the inscribed circle");
  metrics->add_option("--out", out_dir, "output directory")->required();

  auto* experiment = app.add_subcommand("experiment", "Run a phantom->scan->reconstruct sweep");
  experiment->add_option("--config", config_path, "INI config file")->required();
  experiment->add_option("--out", out_dir, "output directory")->required();

  int ca_h = 64, ca_w = 64, ca_angles = 32, ca_det = -1, ca_pairs = 100;
  double ca_pixel = 0.003, ca_spacing = 0.0, ca_step = 0.5;
  std::uint64_t ca_seed = 20240915;
  auto* certify = app.add_subcommand("certify-adjoint",
                                     "Check forward/adjoint consistency on random pairs");
  certify->add_option("--height", ca_h, "image height");
  certify->add_option("--width", ca_w, "image width");
  certify->add_option("--angles", ca_angles, "number of projection angles");
  certify->add_option("--dets", ca_det, "detector count (-1 full coverage, 0 image width)");
  certify->add_option("--pixel", ca_pixel, "pixel size, mm");
  certify->add_option("--spacing", ca_spacing, "detector spacing, mm (0 = pixel size)");
  certify->add_option("--step", ca_step, "ray step as a fraction of pixel size");
  certify->add_option("--pairs", ca_pairs, "number of random pairs");
  certify->add_option("--seed", ca_seed, "RNG seed");

  std::string in_dir, gt_dir;
  double lo = 0.0, hi = 0.0;
  auto* exportp = app.add_subcommand("export-png", "Export frames as 16-bit grayscale PNGs");
  exportp->add_option("--in", in_dir, "recon/phantom/stack directory")->required();
  exportp->add_option("--gt", gt_dir, "directory supplying the normalization range");
  auto* lo_opt = exportp->add_option("--lo", lo, "explicit lower bound");
  auto* hi_opt = exportp->add_option("--hi", hi, "explicit upper bound")->needs(lo_opt);
  lo_opt->needs(hi_opt);
  exportp->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const xct::Ini cfg = xct::cli::load_config(config_path);
  if (phantom->parsed()) {
    xct::cli::run_phantom(cfg, config_path, out_dir);
  } else if (scan->parsed()) {
    xct::cli::run_scan(cfg, config_path, seq_dir, out_dir);
  } else if (reconstruct->parsed()) {
    xct::cli::run_reconstruct(cfg, config_path, stack_dirs, method, wls_flag, out_dir);
  } else if (metrics->parsed()) {
    xct::cli::run_metrics(cfg, config_path, recon_dir, stack_dir, masked_flag, out_dir);
  } else if (experiment->parsed()) {
    xct::cli::run_experiment(cfg, config_path, out_dir);
  } else if (certify->parsed()) {
    return xct::cli::run_certify_adjoint(ca_h, ca_w, ca_angles, ca_det, ca_pixel, ca_spacing,
                                         ca_step, ca_pairs, ca_seed);
  } else if (exportp->parsed()) {
    const bool have_range = lo_opt->count() > 0;
    xct::cli::run_export_png(in_dir, gt_dir, lo, hi, have_range, out_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const xct::cli::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const xct::IniError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
