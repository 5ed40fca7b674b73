#pragma once

#include <vector>

namespace xct {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam. Moments are kept in double regardless of the parameter
// type. lr is mutable for schedulers (multiplicative decay per outer
// iteration). Non-finite gradients are rejected with diagnostics.
template <typename T>
struct Adam {
  AdamConfig cfg;
  double lr = 1e-3;
  long step = 0;
  std::vector<double> m, v;

  Adam() = default;
  explicit Adam(const AdamConfig& c, std::size_t n_params);

  void update(std::vector<T>& params, const std::vector<T>& grads);
};

extern template struct Adam<float>;
extern template struct Adam<double>;

}  // namespace xct
