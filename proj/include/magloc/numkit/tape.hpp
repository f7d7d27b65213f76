#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "magloc/numkit/ops.hpp"
#include "magloc/numkit/tensor.hpp"

namespace magloc::numkit {

enum class OpKind { Conv1d, Relu, GlobalAvgPool, Dense, MseLoss };

using ValueId = std::size_t;

struct TapeEntry {
  OpKind kind;
  std::vector<ValueId> inputs;
  ValueId output;
  std::size_t dilation = 1;
  Padding padding = Padding::Same;
};

template <typename T>
class Gradients {
 public:
  Gradients(std::vector<std::optional<Tensor<T>>> grads, std::size_t visited)
      : grads_(std::move(grads)), visited_(visited) {}

  bool has(ValueId id) const { return id < grads_.size() && grads_[id].has_value(); }
  const Tensor<T>& of(ValueId id) const;
  /// Number of tape entries replayed by backward.
  std::size_t entries_visited() const noexcept { return visited_; }

 private:
  std::vector<std::optional<Tensor<T>>> grads_;
  std::size_t visited_;
};

/// Records whole-layer operations and replays them in reverse to produce
/// gradients. Values are identified by the order in which they were created,
/// so every entry's inputs precede its output.
template <typename T>
class Tape {
 public:
  ValueId leaf(Tensor<T> value, bool requires_grad);
  ValueId parameter(Tensor<T> value) { return leaf(std::move(value), true); }
  ValueId constant(Tensor<T> value) { return leaf(std::move(value), false); }

  ValueId conv1d(ValueId x, ValueId w, ValueId b, std::size_t dilation, Padding padding);
  ValueId relu(ValueId x);
  ValueId global_avg_pool(ValueId x);
  ValueId dense(ValueId x, ValueId w, ValueId b);
  ValueId mse_loss(ValueId pred, ValueId target);

  const Tensor<T>& value(ValueId id) const { return values_.at(id); }
  const std::vector<TapeEntry>& entries() const noexcept { return entries_; }
  std::size_t value_count() const noexcept { return values_.size(); }

  /// Reverse pass from a scalar value. `seed` is dL/d(loss).
  Gradients<T> backward(ValueId loss, T seed = T{1}) const;

 private:
  ValueId push(Tensor<T> value, bool requires_grad);
  void check_id(ValueId id) const;

  std::vector<Tensor<T>> values_;
  std::vector<bool> requires_grad_;
  std::vector<TapeEntry> entries_;
};

}  // namespace magloc::numkit
