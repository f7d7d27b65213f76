#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "magloc/numkit/tensor.hpp"

namespace magloc::numkit {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::int64_t step = 0;

  static AdamState zeros_like(std::span<const Tensor<T>> params, AdamConfig config = {});
};

/// One bias-corrected Adam update, in place. Moments are allocated on first
/// use if the state is empty.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const Tensor<T>> grads, AdamState<T>& state);

}  // namespace magloc::numkit
