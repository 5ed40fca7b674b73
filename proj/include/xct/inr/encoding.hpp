#pragma once

#include <cstdint>
#include <vector>

namespace xct {

struct EncodingConfig {
  int mapping_size = 256;  // rows of the frequency matrix
  double scale = 5.0;      // stddev of its Gaussian entries
  int input_dim = 3;       // (x,y,t) or (x,y,z,t)
  std::uint64_t seed = 0;
};

// Random Fourier features: v ↦ [cos(2π·B·v) | sin(2π·B·v)], cos block first.
// B is m×input_dim with entries ~ N(0, scale²), frozen after construction.
template <typename T>
struct Encoder {
  EncodingConfig cfg;
  std::vector<T> b;  // row-major m×input_dim

  Encoder() = default;
  explicit Encoder(const EncodingConfig& c);

  int out_dim() const { return 2 * cfg.mapping_size; }

  // coords: n×input_dim row-major in [−1,1]; out: n×out_dim row-major.
  void encode(const T* coords, int n, T* out) const;
  std::vector<T> encode(const std::vector<T>& coords) const;
};

extern template struct Encoder<float>;
extern template struct Encoder<double>;

}  // namespace xct
