#include "xct/inr/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xct {

template <typename T>
Adam<T>::Adam(const AdamConfig& c, std::size_t n_params)
    : cfg(c), lr(c.lr), m(n_params, 0.0), v(n_params, 0.0) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("adam: lr must be > 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0))
    throw std::invalid_argument("adam: betas must lie in [0,1)");
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("adam: eps must be > 0");
}

template <typename T>
void Adam<T>::update(std::vector<T>& params, const std::vector<T>& grads) {
  if (params.size() != m.size() || grads.size() != m.size())
    throw std::invalid_argument("adam: size mismatch between params, grads, and state");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(static_cast<double>(grads[i])))
      throw std::runtime_error("adam: non-finite gradient at index " + std::to_string(i) +
                               " (value " + std::to_string(static_cast<double>(grads[i])) +
                               ", step " + std::to_string(step) + ")");
  }
  ++step;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] = static_cast<T>(static_cast<double>(params[i]) -
                               lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

template struct Adam<float>;
template struct Adam<double>;

}  // namespace xct
