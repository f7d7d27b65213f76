#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "magloc/numkit/ops.hpp"
#include "magloc/numkit/tensor.hpp"

namespace magloc::magnet {

struct ConvLayerSpec {
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t kernel;
  std::size_t dilation;
};

/// conv layers (ReLU after each) -> global average pool -> dense hidden +
/// ReLU -> dense outputs (linear). Any layer count, so tiny instances can be
/// gradient-checked in double precision.
struct NetLayout {
  std::size_t input_channels = 0;
  std::vector<ConvLayerSpec> convs;
  std::size_t hidden = 64;
  std::size_t outputs = 2;
  numkit::Padding padding = numkit::Padding::Same;

  struct ParamSpec {
    std::string name;
    numkit::Shape shape;
    std::size_t fan_in;  // 0 for biases
  };
  /// conv{i}.weight, conv{i}.bias, ..., fc.weight, fc.bias, out.weight, out.bias
  std::vector<ParamSpec> parameters() const;
  std::size_t parameter_count() const;
};

template <typename T>
struct LossAndGradients {
  T loss;
  std::vector<numkit::Tensor<T>> gradients;  // same order as parameters
};

template <typename T>
class ConvRegressor {
 public:
  ConvRegressor() = default;
  ConvRegressor(NetLayout layout, std::vector<numkit::Tensor<T>> params);

  /// He-uniform weights (bound sqrt(6 / fan_in)), zero biases. Each tensor
  /// draws from its own derived stream, so the result depends only on seed.
  static ConvRegressor he_uniform(NetLayout layout, std::uint64_t seed);

  const NetLayout& layout() const noexcept { return layout_; }
  std::vector<numkit::Tensor<T>>& parameters() noexcept { return params_; }
  const std::vector<numkit::Tensor<T>>& parameters() const noexcept { return params_; }

  /// [C x L] -> [outputs] or [B x C x L] -> [B x outputs].
  numkit::Tensor<T> forward(const numkit::Tensor<T>& input) const;

  /// Mean squared error against targets shaped like forward's output, with
  /// gradients for every parameter.
  LossAndGradients<T> loss_and_gradients(const numkit::Tensor<T>& input, const numkit::Tensor<T>& targets) const;

 private:
  void check_input(const numkit::Tensor<T>& input) const;

  NetLayout layout_;
  std::vector<numkit::Tensor<T>> params_;
};

}  // namespace magloc::magnet
