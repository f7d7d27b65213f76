#include "magloc/magnet/network.hpp"

#include <cmath>

#include "magloc/errors.hpp"
#include "magloc/numkit/random.hpp"
#include "magloc/numkit/tape.hpp"

namespace magloc::magnet {

using numkit::Shape;
using numkit::Tensor;

std::vector<NetLayout::ParamSpec> NetLayout::parameters() const {
  std::vector<ParamSpec> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const auto& c = convs[i];
    out.push_back({"conv" + std::to_string(i) + ".weight", {c.out_channels, c.in_channels, c.kernel},
                   c.in_channels * c.kernel});
    out.push_back({"conv" + std::to_string(i) + ".bias", {c.out_channels}, 0});
  }
  const std::size_t pooled = convs.empty() ? input_channels : convs.back().out_channels;
  out.push_back({"fc.weight", {hidden, pooled}, pooled});
  out.push_back({"fc.bias", {hidden}, 0});
  out.push_back({"out.weight", {outputs, hidden}, hidden});
  out.push_back({"out.bias", {outputs}, 0});
  return out;
}

std::size_t NetLayout::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += numkit::element_count(p.shape);
  return n;
}

template <typename T>
ConvRegressor<T>::ConvRegressor(NetLayout layout, std::vector<Tensor<T>> params)
    : layout_(std::move(layout)), params_(std::move(params)) {
  const auto specs = layout_.parameters();
  if (specs.size() != params_.size()) {
    throw ShapeError("network expects " + std::to_string(specs.size()) + " parameter tensors, got " +
                     std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (params_[i].shape() != specs[i].shape) {
      throw ShapeError(specs[i].name + ": expected shape " + numkit::to_string(specs[i].shape) + ", got " +
                       numkit::to_string(params_[i].shape()));
    }
  }
}

template <typename T>
ConvRegressor<T> ConvRegressor<T>::he_uniform(NetLayout layout, std::uint64_t seed) {
  std::vector<Tensor<T>> params;
  const auto specs = layout.parameters();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Tensor<T> t(specs[i].shape);
    if (specs[i].fan_in > 0) {
      numkit::Rng rng(numkit::derive_seed(seed, i));
      const double bound = std::sqrt(6.0 / static_cast<double>(specs[i].fan_in));
      for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
    }
    params.push_back(std::move(t));
  }
  return ConvRegressor(std::move(layout), std::move(params));
}

template <typename T>
void ConvRegressor<T>::check_input(const Tensor<T>& input) const {
  const std::size_t axis = input.rank() == 3 ? 1 : 0;
  if ((input.rank() != 2 && input.rank() != 3) || input.dim(axis) != layout_.input_channels) {
    throw ShapeError("network expects [" + std::to_string(layout_.input_channels) +
                     " x L] or [B x C x L] input, got " + numkit::to_string(input.shape()));
  }
}

template <typename T>
Tensor<T> ConvRegressor<T>::forward(const Tensor<T>& input) const {
  check_input(input);
  const std::size_t n = layout_.convs.size();
  Tensor<T> h = input;
  for (std::size_t i = 0; i < n; ++i) {
    h = numkit::relu(numkit::conv1d(h, params_[2 * i], params_[2 * i + 1], layout_.convs[i].dilation,
                                    layout_.padding));
  }
  h = numkit::global_avg_pool(h);
  h = numkit::relu(numkit::dense(h, params_[2 * n], params_[2 * n + 1]));
  return numkit::dense(h, params_[2 * n + 2], params_[2 * n + 3]);
}

template <typename T>
LossAndGradients<T> ConvRegressor<T>::loss_and_gradients(const Tensor<T>& input, const Tensor<T>& targets) const {
  check_input(input);
  numkit::Tape<T> tape;
  std::vector<numkit::ValueId> ids;
  ids.reserve(params_.size());
  for (const auto& p : params_) ids.push_back(tape.parameter(p));
  const std::size_t n = layout_.convs.size();
  auto h = tape.constant(input);
  for (std::size_t i = 0; i < n; ++i)
    h = tape.relu(tape.conv1d(h, ids[2 * i], ids[2 * i + 1], layout_.convs[i].dilation, layout_.padding));
  h = tape.global_avg_pool(h);
  h = tape.relu(tape.dense(h, ids[2 * n], ids[2 * n + 1]));
  const auto out = tape.dense(h, ids[2 * n + 2], ids[2 * n + 3]);
  const auto loss = tape.mse_loss(out, tape.constant(targets));
  const auto grads = tape.backward(loss);
  LossAndGradients<T> result{tape.value(loss)[0], {}};
  result.gradients.reserve(ids.size());
  for (auto id : ids) result.gradients.push_back(grads.of(id));
  return result;
}

template class ConvRegressor<float>;
template class ConvRegressor<double>;

}  // namespace magloc::magnet
