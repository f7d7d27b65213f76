#include "magloc/numkit/tape.hpp"

#include <string>

namespace magloc::numkit {

template <typename T>
const Tensor<T>& Gradients<T>::of(ValueId id) const {
  if (!has(id)) throw ContractError("no gradient recorded for value " + std::to_string(id));
  return *grads_[id];
}

template <typename T>
ValueId Tape<T>::push(Tensor<T> value, bool requires_grad) {
  values_.push_back(std::move(value));
  requires_grad_.push_back(requires_grad);
  return values_.size() - 1;
}

template <typename T>
void Tape<T>::check_id(ValueId id) const {
  if (id >= values_.size()) throw ContractError("unknown tape value " + std::to_string(id));
}

template <typename T>
ValueId Tape<T>::leaf(Tensor<T> value, bool requires_grad) {
  return push(std::move(value), requires_grad);
}

template <typename T>
ValueId Tape<T>::conv1d(ValueId x, ValueId w, ValueId b, std::size_t dilation, Padding padding) {
  check_id(x);
  check_id(w);
  check_id(b);
  auto y = numkit::conv1d(values_[x], values_[w], values_[b], dilation, padding);
  const ValueId out = push(std::move(y), requires_grad_[x] || requires_grad_[w] || requires_grad_[b]);
  entries_.push_back({OpKind::Conv1d, {x, w, b}, out, dilation, padding});
  return out;
}

template <typename T>
ValueId Tape<T>::relu(ValueId x) {
  check_id(x);
  const ValueId out = push(numkit::relu(values_[x]), requires_grad_[x]);
  entries_.push_back({OpKind::Relu, {x}, out});
  return out;
}

template <typename T>
ValueId Tape<T>::global_avg_pool(ValueId x) {
  check_id(x);
  const ValueId out = push(numkit::global_avg_pool(values_[x]), requires_grad_[x]);
  entries_.push_back({OpKind::GlobalAvgPool, {x}, out});
  return out;
}

template <typename T>
ValueId Tape<T>::dense(ValueId x, ValueId w, ValueId b) {
  check_id(x);
  check_id(w);
  check_id(b);
  auto y = numkit::dense(values_[x], values_[w], values_[b]);
  const ValueId out = push(std::move(y), requires_grad_[x] || requires_grad_[w] || requires_grad_[b]);
  entries_.push_back({OpKind::Dense, {x, w, b}, out});
  return out;
}

template <typename T>
ValueId Tape<T>::mse_loss(ValueId pred, ValueId target) {
  check_id(pred);
  check_id(target);
  const T loss = numkit::mse_loss(values_[pred], values_[target]);
  const ValueId out = push(Tensor<T>::scalar(loss), requires_grad_[pred] || requires_grad_[target]);
  entries_.push_back({OpKind::MseLoss, {pred, target}, out});
  return out;
}

template <typename T>
Gradients<T> Tape<T>::backward(ValueId loss, T seed) const {
  check_id(loss);
  if (values_[loss].size() != 1) {
    throw ContractError("backward: loss value " + std::to_string(loss) + " is not scalar (shape " +
                        to_string(values_[loss].shape()) + ")");
  }
  std::vector<std::optional<Tensor<T>>> grads(values_.size());
  grads[loss] = Tensor<T>(values_[loss].shape(), seed);

  auto accumulate = [&](ValueId id, Tensor<T>&& g) {
    if (!requires_grad_[id]) return;
    if (!grads[id]) {
      grads[id] = std::move(g);
      return;
    }
    Tensor<T>& acc = *grads[id];
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
  };

  std::size_t visited = 0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    const TapeEntry& e = *it;
    if (!grads[e.output]) continue;
    ++visited;
    const Tensor<T>& dy = *grads[e.output];
    switch (e.kind) {
      case OpKind::Conv1d: {
        auto g = conv1d_backward(values_[e.inputs[0]], values_[e.inputs[1]], e.dilation,
                                 e.padding, dy, requires_grad_[e.inputs[0]]);
        accumulate(e.inputs[0], std::move(g.input));
        accumulate(e.inputs[1], std::move(g.weights));
        accumulate(e.inputs[2], std::move(g.bias));
        break;
      }
      case OpKind::Relu:
        accumulate(e.inputs[0], relu_backward(values_[e.inputs[0]], dy));
        break;
      case OpKind::GlobalAvgPool:
        accumulate(e.inputs[0], global_avg_pool_backward(values_[e.inputs[0]].shape(), dy));
        break;
      case OpKind::Dense: {
        auto g = dense_backward(values_[e.inputs[0]], values_[e.inputs[1]], dy);
        accumulate(e.inputs[0], std::move(g.input));
        accumulate(e.inputs[1], std::move(g.weights));
        accumulate(e.inputs[2], std::move(g.bias));
        break;
      }
      case OpKind::MseLoss: {
        const Tensor<T>& pred = values_[e.inputs[0]];
        const Tensor<T>& target = values_[e.inputs[1]];
        Tensor<T> gp = mse_loss_backward(pred, target, dy[0]);
        Tensor<T> gt(gp.shape());
        for (std::size_t i = 0; i < gp.size(); ++i) gt[i] = -gp[i];
        accumulate(e.inputs[0], std::move(gp));
        accumulate(e.inputs[1], std::move(gt));
        break;
      }
    }
  }
  return Gradients<T>(std::move(grads), visited);
}

template class Gradients<float>;
template class Gradients<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace magloc::numkit
