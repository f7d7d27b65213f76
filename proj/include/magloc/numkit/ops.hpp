#pragma once

#include <cstddef>

#include "magloc/numkit/tensor.hpp"

namespace magloc::numkit {

/// Zero padding placement for dilated convolutions. The total padding is
/// dilation * (kernel - 1). Same splits it as left = total / 2 and
/// right = total - left; Causal puts all of it on the left.
enum class Padding { Same, Causal };

std::size_t left_padding(std::size_t kernel, std::size_t dilation, Padding padding);

// Forward kernels. Convolution and pooling accept [C x L] or batched
// [B x C x L] inputs; dense accepts [n] or batched [B x n].

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                 std::size_t dilation, Padding padding = Padding::Same);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x);

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias);

/// Mean over all elements of (pred - target)^2.
template <typename T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

/// Mean over all elements of |pred - target|.
template <typename T>
T mae_metric(const Tensor<T>& pred, const Tensor<T>& target);

// Backward kernels: given the forward inputs and dL/d(output), produce
// dL/d(each input).

template <typename T>
struct ConvGradients {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
ConvGradients<T> conv1d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                 std::size_t dilation, Padding padding,
                                 const Tensor<T>& grad_output, bool need_input_grad = true);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_output);

template <typename T>
Tensor<T> global_avg_pool_backward(const Shape& input_shape, const Tensor<T>& grad_output);

template <typename T>
struct DenseGradients {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
DenseGradients<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights,
                                 const Tensor<T>& grad_output);

/// Gradient of mse_loss w.r.t. pred, scaled by the upstream scalar gradient.
template <typename T>
Tensor<T> mse_loss_backward(const Tensor<T>& pred, const Tensor<T>& target, T upstream);

}  // namespace magloc::numkit
