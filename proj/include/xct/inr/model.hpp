#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xct/inr/encoding.hpp"

namespace xct {

struct MlpConfig {
  int in_dim = 512;   // feature width (2 × encoder mapping_size)
  int hidden = 256;
  int n_layers = 3;   // hidden layers
  double omega0 = 30.0;
  std::uint64_t seed = 0;
};

// Scratch kept between forward and backward. Reusable across calls.
template <typename T>
struct MlpCache {
  int n = 0;
  std::vector<std::vector<T>> h;    // h[0] = input features n×in_dim, h[l>0] n×hidden
  std::vector<std::vector<T>> pre;  // per layer, n×hidden, before the sine
  std::vector<std::vector<T>> sv;   // sin(t), t = b·ω₀·pre + c
  std::vector<std::vector<T>> cv;   // cos(t)
};

// MLP with modulated sine activations
//   h_{l+1} = a_l · sin(b_l·ω₀·(W_l h_l + bias_l) + c_l) + d_l
// and a linear scalar head. The per-layer scalars (a,b,c,d) are trainable,
// initialized to (1,1,0,0) which reduces each activation to sin(ω₀·pre).
// Parameters live in one flat vector:
//   [W_0, bias_0, ..., W_{L−1}, bias_{L−1}, W_out, b_out, (a,b,c,d)×L].
template <typename T>
struct Mlp {
  MlpConfig cfg;
  std::vector<T> params;

  Mlp() = default;
  explicit Mlp(const MlpConfig& c, bool initialize = true);

  std::size_t n_params() const { return total_; }
  int layer_in(int l) const { return l == 0 ? cfg.in_dim : cfg.hidden; }
  std::size_t w_off(int l) const { return w_off_[static_cast<std::size_t>(l)]; }
  std::size_t bias_off(int l) const { return bias_off_[static_cast<std::size_t>(l)]; }
  std::size_t wout_off() const { return wout_off_; }
  std::size_t bout_off() const { return bout_off_; }
  std::size_t mod_off(int l) const { return mods_off_ + 4 * static_cast<std::size_t>(l); }

  // features: n×in_dim row-major; out: n scalars. cache may be null when no
  // backward pass will follow. Rejects non-finite parameters.
  void forward(const T* features, int n, T* out, MlpCache<T>* cache) const;

  // d_out: n upstream gradients. grads is resized/zeroed to n_params() and
  // filled with exact reverse-mode gradients (weights, biases, modulations).
  void backward(const MlpCache<T>& cache, const T* d_out, std::vector<T>& grads) const;

 private:
  void compute_offsets();
  std::vector<std::size_t> w_off_, bias_off_;
  std::size_t wout_off_ = 0, bout_off_ = 0, mods_off_ = 0, total_ = 0;
};

extern template struct Mlp<float>;
extern template struct Mlp<double>;

// Checkpoint: "XINR" magic, version, encoder + MLP configs, then the frozen
// frequency matrix and the flat parameter vector as little-endian float32.
void save_model(const std::string& path, const Encoder<float>& enc, const Mlp<float>& mlp);
void load_model(const std::string& path, Encoder<float>& enc, Mlp<float>& mlp);

}  // namespace xct
