#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xct/acquisition/scan.hpp"
#include "xct/core/grid.hpp"
#include "xct/inr/adam.hpp"
#include "xct/inr/encoding.hpp"
#include "xct/inr/model.hpp"
#include "xct/solvers/cgls.hpp"
#include "xct/solvers/ring.hpp"

namespace xct {

struct TvConfig {
  double lambda_s = 1e-4;  // spatial TV weight
  double lambda_t = 1e-4;  // temporal (previous-frame) weight
  double lambda_a = 1e-3;  // axial (adjacent-slice) weight, volumetric only
  double eps_tv = 1e-6;
  int k_s = 2;  // spatial TV active for outer iterations k > k_s
  int k_t = 2;  // temporal term active for k > k_t
};

struct RingConfig {
  bool enabled = false;   // subtract the current bias estimate in x-updates
  bool estimate = false;  // re-estimate the bias each outer iteration
  RingEstimatorConfig estimator;
};

struct ReconstructionConfig {
  int outer_iters = 30;
  int inr_updates_per_iter = 50;
  CglsConfig cgls;
  TvConfig tv;
  int downsample = 2;  // s: the network trains against s×s mean-pooled targets
  bool wls = false;
  RingConfig ring;
  int axial_batch = 4;  // Z_b, used by reconstruct_4d

  int mapping_size = 256;
  double feature_scale = 5.0;
  int hidden = 256;
  int n_layers = 3;
  double omega0 = 30.0;
  AdamConfig adam;
  double lr_decay = 0.98;  // multiplicative, once per outer iteration
  std::uint64_t seed = 0;
};

struct IterationRecord {
  int iter = 0;
  double mean_residual = 0.0;  // mean over (slice, frame) of ||x − q||_2
  std::vector<double> data_residuals;  // ||y_corrected − P x||_2 per (slice, frame)
  double loss_mse = 0.0;   // weighted loss terms at each frame's last network step
  double loss_tv_s = 0.0;
  double loss_tv_t = 0.0;
  double loss_tv_a = 0.0;
  double lr = 0.0;
  int cgls_breakdowns = 0;
};

struct AdmmResult {
  Encoder<float> encoder;
  Mlp<float> mlp;  // checkpoint from the best iteration
  int n_slices = 1;
  int n_frames = 0;
  std::vector<Image<float>> frames;  // best-model renders, index = slice·T + t
  std::vector<IterationRecord> history;
  int best_iter = 0;
  std::vector<double> ring_estimate;  // final bias estimate (empty when off)
};

// Index of the minimal mean residual; ties go to the earlier iteration.
int select_model(const std::vector<double>& residuals);

// Dynamic 2D reconstruction (inputs (x,y,t)) of one sinogram stack.
AdmmResult admm_reconstruct(const SinogramStack& stack, const ReconstructionConfig& cfg);

// Shared core: one network over Z co-scheduled slices (inputs (x,y,z,t) when
// Z > 1, z normalized within the batch). All stacks must share the schedule.
AdmmResult admm_reconstruct_batch(const std::vector<const SinogramStack*>& slices,
                                  const ReconstructionConfig& cfg);

struct Admm4dResult {
  std::vector<AdmmResult> batches;  // contiguous axial batches, in order
  int n_slices = 0;
  int n_frames = 0;
  // frame (z, t) lives in batches[batch_of(z)].frames[(z − batch_start)·T + t]
  const Image<float>& frame(int z, int t) const;
  std::vector<int> batch_starts;
};

// Partitions Z slices into contiguous batches of cfg.axial_batch (last batch
// may be smaller) and reconstructs each batch independently.
Admm4dResult reconstruct_4d(const std::vector<SinogramStack>& stacks,
                            const ReconstructionConfig& cfg);

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history);

}  // namespace xct
