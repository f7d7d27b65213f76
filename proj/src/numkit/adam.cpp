#include "magloc/numkit/adam.hpp"

#include <cmath>
#include <string>

namespace magloc::numkit {

template <typename T>
AdamState<T> AdamState<T>::zeros_like(std::span<const Tensor<T>> params, AdamConfig config) {
  AdamState<T> s;
  s.config = config;
  for (const auto& p : params) {
    s.m.emplace_back(p.shape());
    s.v.emplace_back(p.shape());
  }
  return s;
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads, AdamState<T>& state) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (state.m.empty() && !params.empty()) {
    state = AdamState<T>::zeros_like(std::span<const Tensor<T>>(params.data(), params.size()),
                                     state.config);
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state/parameter count mismatch");
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].shape() != grads[p].shape() || params[p].shape() != state.m[p].shape()) {
      throw ShapeError("adam_step: shape mismatch for parameter " + std::to_string(p) + ": " +
                       to_string(params[p].shape()) + " vs grad " + to_string(grads[p].shape()));
    }
  }

  state.step += 1;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor<T>& w = params[p];
    const Tensor<T>& g = grads[p];
    Tensor<T>& m = state.m[p];
    Tensor<T>& v = state.v[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = c.beta1 * static_cast<double>(m[i]) + (1.0 - c.beta1) * gi;
      const double vi = c.beta2 * static_cast<double>(v[i]) + (1.0 - c.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / correction1;
      const double v_hat = vi / correction2;
      w[i] = static_cast<T>(static_cast<double>(w[i]) -
                            c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon));
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step(std::span<Tensor<float>>, std::span<const Tensor<float>>, AdamState<float>&);
template void adam_step(std::span<Tensor<double>>, std::span<const Tensor<double>>,
                        AdamState<double>&);

}  // namespace magloc::numkit
