#include "magloc/numkit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace magloc::numkit {

std::size_t left_padding(std::size_t kernel, std::size_t dilation, Padding padding) {
  const std::size_t total = dilation * (kernel - 1);
  return padding == Padding::Causal ? total : total / 2;
}

namespace {

#if defined(__AVX512F__)
constexpr std::size_t kVecBytes = 64;
#else
constexpr std::size_t kVecBytes = 32;
#endif

// Register vector of T with element alignment, so loads need not be aligned.
template <typename T>
struct Simd {
  static constexpr std::size_t width = kVecBytes / sizeof(T);
  typedef T type __attribute__((vector_size(kVecBytes), aligned(alignof(T))));

  static type load(const T* p) { return *reinterpret_cast<const type*>(p); }
  static void store(T* p, type v) { *reinterpret_cast<type*>(p) = v; }
  static type splat(T x) { return type{} + x; }
};

// Vectors per time tile; a tile covers kTileVecs * width samples.
constexpr std::size_t kTileVecs = 2;

template <typename T>
constexpr std::size_t kTile = kTileVecs * Simd<T>::width;

constexpr std::size_t kGradChannelBlock = 4;

// Output channels per register block (accumulators = block * kTileVecs).
#if defined(__AVX512F__)
constexpr std::size_t kChannelBlock = 8;
#else
constexpr std::size_t kChannelBlock = 6;
#endif

struct BatchView {
  std::size_t batch;
  std::size_t channels;
  std::size_t length;
};

template <typename T>
BatchView view_of(const Tensor<T>& x, const char* op) {
  if (x.rank() == 2) return {1, x.dim(0), x.dim(1)};
  if (x.rank() == 3) return {x.dim(0), x.dim(1), x.dim(2)};
  throw ShapeError(std::string(op) + ": expected [C x L] or [B x C x L], got " + to_string(x.shape()));
}

// Half-open range of taps j whose window [j*d, j*d + length) intersects the
// real samples stored at [offset, offset + length) of a padded row. Taps
// outside it only ever read zeros.
struct TapRange {
  std::size_t lo;
  std::size_t hi;
};

TapRange live_taps(std::size_t kernel, std::size_t dilation, std::size_t offset,
                   std::size_t length) {
  std::size_t lo = kernel;
  std::size_t hi = 0;
  for (std::size_t j = 0; j < kernel; ++j) {
    const std::size_t start = j * dilation;
    if (start + length > offset && start < offset + length) {
      lo = std::min(lo, j);
      hi = j + 1;
    }
  }
  if (lo >= hi) return {0, 0};
  return {lo, hi};
}

std::size_t padded_stride(std::size_t length, std::size_t kernel, std::size_t dilation,
                          std::size_t tile) {
  const std::size_t tiles = (length + tile - 1) / tile;
  return tiles * tile + dilation * (kernel - 1);
}

// Copies `channels` rows of `length` samples into zero-filled rows of
// `stride`, starting at column `offset`.
template <typename T>
void fill_padded(const T* src, std::size_t channels, std::size_t length, std::size_t offset,
                 std::size_t stride, std::vector<T>& dst) {
  dst.assign(channels * stride, T{0});
  for (std::size_t c = 0; c < channels; ++c) {
    std::copy_n(src + c * length, length, dst.data() + c * stride + offset);
  }
}

// Dilated correlation over padded rows:
//   out[c][t] = bias[c] + sum_i sum_{j in taps} w[c][i][j] * xp[i][t + j*d]
// Accumulation order per output is bias, then i ascending, then j ascending,
// which matches a direct nested-loop sum term for term. The x panel of each
// time tile and the weights are packed so the micro-kernel reads both
// sequentially.
template <typename T>
void correlate(const T* xp, std::size_t stride, std::size_t in_channels, const T* w,
               std::size_t out_channels, std::size_t kernel, std::size_t dilation, TapRange taps,
               const T* bias, T* out, std::size_t length) {
  using S = Simd<T>;
  using V = typename S::type;
  constexpr std::size_t TT = kTile<T>;
  constexpr std::size_t NC = kChannelBlock;
  const std::size_t ntaps = taps.hi - taps.lo;
  const std::size_t depth = in_channels * ntaps;
  const std::size_t blocks = (out_channels + NC - 1) / NC;

  // wp[block][kk][c], zero for channels past out_channels.
  std::vector<T> wp(blocks * depth * NC, T{0});
  for (std::size_t c = 0; c < out_channels; ++c) {
    const std::size_t blk = c / NC;
    const std::size_t lane = c % NC;
    for (std::size_t i = 0; i < in_channels; ++i)
      for (std::size_t jj = 0; jj < ntaps; ++jj)
        wp[(blk * depth + i * ntaps + jj) * NC + lane] = w[(c * in_channels + i) * kernel + taps.lo + jj];
  }

  std::vector<T> panel(depth * TT);
  for (std::size_t t0 = 0; t0 < length; t0 += TT) {
    for (std::size_t i = 0; i < in_channels; ++i) {
      const T* row = xp + i * stride + t0;
      for (std::size_t jj = 0; jj < ntaps; ++jj)
        std::copy_n(row + (taps.lo + jj) * dilation, TT, panel.data() + (i * ntaps + jj) * TT);
    }
    const std::size_t n = std::min(TT, length - t0);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      V acc[NC][kTileVecs];
      for (std::size_t c = 0; c < NC; ++c) {
        const std::size_t ch = blk * NC + c;
        const V b = S::splat(bias && ch < out_channels ? bias[ch] : T{0});
        for (std::size_t v = 0; v < kTileVecs; ++v) acc[c][v] = b;
      }
      const T* wk = wp.data() + blk * depth * NC;
      const T* pk = panel.data();
      for (std::size_t kk = 0; kk < depth; ++kk, wk += NC, pk += TT) {
        V x[kTileVecs];
        for (std::size_t v = 0; v < kTileVecs; ++v) x[v] = S::load(pk + v * S::width);
        for (std::size_t c = 0; c < NC; ++c) {
          const T wv = wk[c];
          for (std::size_t v = 0; v < kTileVecs; ++v) acc[c][v] += wv * x[v];
        }
      }
      const std::size_t valid = std::min(NC, out_channels - blk * NC);
      for (std::size_t c = 0; c < valid; ++c) {
        T* dst = out + (blk * NC + c) * length + t0;
        if (n == TT) {
          for (std::size_t v = 0; v < kTileVecs; ++v) S::store(dst + v * S::width, acc[c][v]);
        } else {
          T tmp[TT];
          for (std::size_t v = 0; v < kTileVecs; ++v) S::store(tmp + v * S::width, acc[c][v]);
          std::copy_n(tmp, n, dst);
        }
      }
    }
  }
}

// grad[c][j] = sum_t dy[c][t] * xp[t + j*d] for NC channels and NJ taps.
// `dy` rows and `xp` must be readable (zero-filled) up to `padded_length`.
template <typename T, std::size_t NC, std::size_t NJ>
void weight_grad_block(const T* dy, std::size_t dy_stride, const T* xp, std::size_t dilation,
                       std::size_t padded_length, T* result /* [NC][NJ] */) {
  using S = Simd<T>;
  using V = typename S::type;
  V acc[NC][NJ];
  for (std::size_t c = 0; c < NC; ++c)
    for (std::size_t j = 0; j < NJ; ++j) acc[c][j] = S::splat(T{0});
  for (std::size_t t = 0; t < padded_length; t += S::width) {
    V g[NC];
    for (std::size_t c = 0; c < NC; ++c) g[c] = S::load(dy + c * dy_stride + t);
    for (std::size_t j = 0; j < NJ; ++j) {
      const V x = S::load(xp + t + j * dilation);
      for (std::size_t c = 0; c < NC; ++c) acc[c][j] += g[c] * x;
    }
  }
  T lanes[NC * NJ][S::width];
  for (std::size_t c = 0; c < NC; ++c)
    for (std::size_t j = 0; j < NJ; ++j) S::store(lanes[c * NJ + j], acc[c][j]);
  for (std::size_t r = 0; r < NC * NJ; ++r) {
    T s{0};
    for (std::size_t l = 0; l < S::width; ++l) s += lanes[r][l];
    result[r] = s;
  }
}

template <typename T, std::size_t NC>
void weight_grad_channels(const T* dy, std::size_t dy_stride, const T* xp, std::size_t dilation,
                          std::size_t padded_length, TapRange taps, std::size_t in_channels,
                          std::size_t kernel, std::size_t i, T* grad_w) {
  constexpr std::size_t NJ = 4;
  T r[NC * NJ];
  std::size_t j = taps.lo;
  for (; j + NJ <= taps.hi; j += NJ) {
    weight_grad_block<T, NC, NJ>(dy, dy_stride, xp + j * dilation, dilation, padded_length, r);
    for (std::size_t c = 0; c < NC; ++c)
      for (std::size_t u = 0; u < NJ; ++u) grad_w[(c * in_channels + i) * kernel + j + u] += r[c * NJ + u];
  }
  for (; j < taps.hi; ++j) {
    weight_grad_block<T, NC, 1>(dy, dy_stride, xp + j * dilation, dilation, padded_length, r);
    for (std::size_t c = 0; c < NC; ++c) grad_w[(c * in_channels + i) * kernel + j] += r[c];
  }
}

void check_same_shape(const Shape& a, const Shape& b, const char* op) {
  if (a != b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
  }
}

struct ConvDims {
  BatchView in;
  std::size_t out_channels;
  std::size_t kernel;
};

template <typename T>
ConvDims conv_dims(const Tensor<T>& input, const Tensor<T>& weights, std::size_t dilation) {
  const BatchView in = view_of(input, "conv1d");
  if (weights.rank() != 3) {
    throw ShapeError("conv1d: weights must be [C_out x C_in x k], got " + to_string(weights.shape()));
  }
  if (weights.dim(1) != in.channels) {
    throw ShapeError("conv1d: weights expect " + std::to_string(weights.dim(1)) +
                     " input channels, input has " + std::to_string(in.channels));
  }
  require(dilation >= 1, "conv1d: dilation must be >= 1");
  return {in, weights.dim(0), weights.dim(2)};
}

template <typename T>
Shape with_channels(const Tensor<T>& like, std::size_t channels) {
  Shape s = like.shape();
  s[s.size() - 2] = channels;
  return s;
}

}  // namespace

template <typename T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                 std::size_t dilation, Padding padding) {
  const ConvDims d = conv_dims(input, weights, dilation);
  if (bias.rank() != 1 || bias.dim(0) != d.out_channels) {
    throw ShapeError("conv1d: bias must be [" + std::to_string(d.out_channels) + "], got " +
                     to_string(bias.shape()));
  }
  const std::size_t L = d.in.length;
  const std::size_t left = left_padding(d.kernel, dilation, padding);
  const std::size_t stride = padded_stride(L, d.kernel, dilation, kTile<T>);
  const TapRange taps = live_taps(d.kernel, dilation, left, L);

  Tensor<T> out(with_channels(input, d.out_channels));
  std::vector<T> xp;
  for (std::size_t b = 0; b < d.in.batch; ++b) {
    fill_padded(input.data() + b * d.in.channels * L, d.in.channels, L, left, stride, xp);
    correlate(xp.data(), stride, d.in.channels, weights.data(), d.out_channels, d.kernel,
              dilation, taps, bias.data(), out.data() + b * d.out_channels * L, L);
  }
  return out;
}

template <typename T>
ConvGradients<T> conv1d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                                 std::size_t dilation, Padding padding,
                                 const Tensor<T>& grad_output, bool need_input_grad) {
  const ConvDims d = conv_dims(input, weights, dilation);
  check_same_shape(grad_output.shape(), with_channels(input, d.out_channels), "conv1d_backward");
  const std::size_t L = d.in.length;
  const std::size_t cin = d.in.channels;
  const std::size_t cout = d.out_channels;
  const std::size_t k = d.kernel;
  const std::size_t left = left_padding(k, dilation, padding);
  const std::size_t right = dilation * (k - 1) - left;
  const std::size_t stride = padded_stride(L, k, dilation, kTile<T>);

  ConvGradients<T> g{Tensor<T>(input.shape()), Tensor<T>(weights.shape()), Tensor<T>(Shape{cout})};

  // Input gradient is a correlation of the right-padded output gradient with
  // the flipped, transposed kernel.
  std::vector<T> flipped;
  if (need_input_grad) {
    flipped.resize(weights.size());
    for (std::size_t c = 0; c < cout; ++c)
      for (std::size_t i = 0; i < cin; ++i)
        for (std::size_t j = 0; j < k; ++j)
          flipped[(i * cout + c) * k + (k - 1 - j)] = weights[(c * cin + i) * k + j];
  }
  const TapRange fwd_taps = live_taps(k, dilation, left, L);
  const TapRange bwd_taps = live_taps(k, dilation, right, L);

  std::vector<T> xp;
  std::vector<T> dyp;
  std::vector<T> dyz;
  const std::size_t dy_stride = (L + kTile<T> - 1) / kTile<T> * kTile<T>;
  for (std::size_t b = 0; b < d.in.batch; ++b) {
    const T* dy = grad_output.data() + b * cout * L;
    for (std::size_t c = 0; c < cout; ++c) {
      T s{0};
      for (std::size_t t = 0; t < L; ++t) s += dy[c * L + t];
      g.bias[c] += s;
    }

    fill_padded(input.data() + b * cin * L, cin, L, left, stride, xp);
    fill_padded(dy, cout, L, 0, dy_stride, dyz);
    for (std::size_t i = 0; i < cin; ++i) {
      const T* xr = xp.data() + i * stride;
      std::size_t c = 0;
      for (; c + kGradChannelBlock <= cout; c += kGradChannelBlock) {
        weight_grad_channels<T, kGradChannelBlock>(dyz.data() + c * dy_stride, dy_stride, xr, dilation,
                                               dy_stride, fwd_taps, cin, k, i,
                                               g.weights.data() + c * cin * k);
      }
      for (; c < cout; ++c) {
        weight_grad_channels<T, 1>(dyz.data() + c * dy_stride, dy_stride, xr, dilation, dy_stride,
                                   fwd_taps, cin, k, i, g.weights.data() + c * cin * k);
      }
    }

    if (need_input_grad) {
      fill_padded(dy, cout, L, right, stride, dyp);
      correlate(dyp.data(), stride, cout, flipped.data(), cin, k, dilation, bwd_taps,
                static_cast<const T*>(nullptr), g.input.data() + b * cin * L, L);
    }
  }
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T{0} ? x[i] : T{0};
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_output) {
  check_same_shape(x.shape(), grad_output.shape(), "relu_backward");
  Tensor<T> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] > T{0} ? grad_output[i] : T{0};
  return g;
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& x) {
  const BatchView v = view_of(x, "global_avg_pool");
  Tensor<T> y(x.rank() == 2 ? Shape{v.channels} : Shape{v.batch, v.channels});
  for (std::size_t r = 0; r < v.batch * v.channels; ++r) {
    T s{0};
    for (std::size_t t = 0; t < v.length; ++t) s += x[r * v.length + t];
    y[r] = s / static_cast<T>(v.length);
  }
  return y;
}

template <typename T>
Tensor<T> global_avg_pool_backward(const Shape& input_shape, const Tensor<T>& grad_output) {
  Tensor<T> g(input_shape);
  const BatchView v = view_of(g, "global_avg_pool_backward");
  if (grad_output.size() != v.batch * v.channels) {
    throw ShapeError("global_avg_pool_backward: gradient " + to_string(grad_output.shape()) +
                     " does not match input " + to_string(input_shape));
  }
  const T scale = T{1} / static_cast<T>(v.length);
  for (std::size_t r = 0; r < v.batch * v.channels; ++r) {
    const T value = grad_output[r] * scale;
    std::fill_n(g.data() + r * v.length, v.length, value);
  }
  return g;
}

namespace {
struct DenseDims {
  std::size_t batch;
  std::size_t in;
  std::size_t out;
};

template <typename T>
DenseDims dense_dims(const Tensor<T>& x, const Tensor<T>& weights) {
  if (weights.rank() != 2) {
    throw ShapeError("dense: weights must be [m x n], got " + to_string(weights.shape()));
  }
  std::size_t batch = 1;
  std::size_t n = 0;
  if (x.rank() == 1) {
    n = x.dim(0);
  } else if (x.rank() == 2) {
    batch = x.dim(0);
    n = x.dim(1);
  } else {
    throw ShapeError("dense: input must be [n] or [B x n], got " + to_string(x.shape()));
  }
  if (weights.dim(1) != n) {
    throw ShapeError("dense: weights " + to_string(weights.shape()) + " incompatible with input " +
                     to_string(x.shape()));
  }
  return {batch, n, weights.dim(0)};
}
}  // namespace

template <typename T>
Tensor<T> dense(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  const DenseDims d = dense_dims(x, weights);
  if (bias.rank() != 1 || bias.dim(0) != d.out) {
    throw ShapeError("dense: bias must be [" + std::to_string(d.out) + "], got " +
                     to_string(bias.shape()));
  }
  Tensor<T> y(x.rank() == 1 ? Shape{d.out} : Shape{d.batch, d.out});
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* xr = x.data() + b * d.in;
    for (std::size_t m = 0; m < d.out; ++m) {
      const T* wr = weights.data() + m * d.in;
      T s = bias[m];
      for (std::size_t n = 0; n < d.in; ++n) s += wr[n] * xr[n];
      y[b * d.out + m] = s;
    }
  }
  return y;
}

template <typename T>
DenseGradients<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights,
                                 const Tensor<T>& grad_output) {
  const DenseDims d = dense_dims(x, weights);
  if (grad_output.size() != d.batch * d.out) {
    throw ShapeError("dense_backward: gradient " + to_string(grad_output.shape()) +
                     " does not match output of " + to_string(weights.shape()));
  }
  DenseGradients<T> g{Tensor<T>(x.shape()), Tensor<T>(weights.shape()), Tensor<T>(Shape{d.out})};
  for (std::size_t b = 0; b < d.batch; ++b) {
    const T* xr = x.data() + b * d.in;
    const T* dy = grad_output.data() + b * d.out;
    T* dx = g.input.data() + b * d.in;
    for (std::size_t m = 0; m < d.out; ++m) {
      const T* wr = weights.data() + m * d.in;
      T* dw = g.weights.data() + m * d.in;
      g.bias[m] += dy[m];
      for (std::size_t n = 0; n < d.in; ++n) {
        dw[n] += dy[m] * xr[n];
        dx[n] += dy[m] * wr[n];
      }
    }
  }
  return g;
}

template <typename T>
T mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  check_same_shape(pred.shape(), target.shape(), "mse_loss");
  T s{0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T e = pred[i] - target[i];
    s += e * e;
  }
  return s / static_cast<T>(pred.size());
}

template <typename T>
Tensor<T> mse_loss_backward(const Tensor<T>& pred, const Tensor<T>& target, T upstream) {
  check_same_shape(pred.shape(), target.shape(), "mse_loss_backward");
  Tensor<T> g(pred.shape());
  const T scale = T{2} * upstream / static_cast<T>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * (pred[i] - target[i]);
  return g;
}

template <typename T>
T mae_metric(const Tensor<T>& pred, const Tensor<T>& target) {
  check_same_shape(pred.shape(), target.shape(), "mae_metric");
  T s{0};
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<T>(pred.size());
}

#define MAGLOC_INSTANTIATE_OPS(T)                                                              \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, \
                            Padding);                                                          \
  template ConvGradients<T> conv1d_backward(const Tensor<T>&, const Tensor<T>&, std::size_t,   \
                                            Padding, const Tensor<T>&, bool);                  \
  template Tensor<T> relu(const Tensor<T>&);                                                   \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                                        \
  template Tensor<T> global_avg_pool_backward(const Shape&, const Tensor<T>&);                 \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
  template DenseGradients<T> dense_backward(const Tensor<T>&, const Tensor<T>&,                \
                                            const Tensor<T>&);                                 \
  template T mse_loss(const Tensor<T>&, const Tensor<T>&);                                     \
  template Tensor<T> mse_loss_backward(const Tensor<T>&, const Tensor<T>&, T);                 \
  template T mae_metric(const Tensor<T>&, const Tensor<T>&);

MAGLOC_INSTANTIATE_OPS(float)
MAGLOC_INSTANTIATE_OPS(double)

#undef MAGLOC_INSTANTIATE_OPS

}  // namespace magloc::numkit
