#include "xct/inr/encoding.hpp"

#include <cmath>
#include <stdexcept>

#include "xct/core/rng.hpp"
#include "xct/kernels/kernels.hpp"

namespace xct {

template <typename T>
Encoder<T>::Encoder(const EncodingConfig& c) : cfg(c) {
  if (cfg.mapping_size < 1) throw std::invalid_argument("encoder: mapping_size must be >= 1");
  if (cfg.input_dim < 1) throw std::invalid_argument("encoder: input_dim must be >= 1");
  if (!(cfg.scale > 0.0)) throw std::invalid_argument("encoder: scale must be > 0");
  Rng rng(derive_seed(cfg.seed, 0xE4C));
  b.resize(static_cast<std::size_t>(cfg.mapping_size) * cfg.input_dim);
  for (auto& v : b) v = static_cast<T>(cfg.scale * rng.normal());
}

template <typename T>
void Encoder<T>::encode(const T* coords, int n, T* out) const {
  const int m = cfg.mapping_size;
  const std::size_t nm = static_cast<std::size_t>(n) * m;
  std::vector<T> pre(nm);
  kernels::gemm_nt(static_cast<std::size_t>(n), static_cast<std::size_t>(m),
                   static_cast<std::size_t>(cfg.input_dim), coords, b.data(), pre.data());
  const T two_pi = static_cast<T>(2.0 * M_PI);
  for (int i = 0; i < n; ++i) {
    const T* pr = pre.data() + static_cast<std::size_t>(i) * m;
    T* dst = out + static_cast<std::size_t>(i) * (2 * m);
    for (int j = 0; j < m; ++j) {
      const T a = two_pi * pr[j];
      dst[j] = std::cos(a);
      dst[m + j] = std::sin(a);
    }
  }
}

template <typename T>
std::vector<T> Encoder<T>::encode(const std::vector<T>& coords) const {
  if (coords.size() % static_cast<std::size_t>(cfg.input_dim) != 0)
    throw std::invalid_argument("encoder: coords size not a multiple of input_dim");
  const int n = static_cast<int>(coords.size() / static_cast<std::size_t>(cfg.input_dim));
  std::vector<T> out(static_cast<std::size_t>(n) * out_dim());
  encode(coords.data(), n, out.data());
  return out;
}

template struct Encoder<float>;
template struct Encoder<double>;

}  // namespace xct
