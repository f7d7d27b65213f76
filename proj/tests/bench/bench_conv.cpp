#include <chrono>
#include <cstdio>

#include "magloc/numkit/ops.hpp"
#include "magloc/numkit/random.hpp"

using namespace magloc::numkit;

int main() {
  const std::size_t kernels[] = {5, 8, 10, 12, 15, 18, 20};
  const std::size_t chans[] = {3, 32, 32, 32, 32, 64, 64, 128};
  const std::size_t B = 16, L = 200;
  Rng rng(1);
  std::vector<Tensor<float>> w, b;
  for (int l = 0; l < 7; ++l) {
    Tensor<float> wl(Shape{chans[l + 1], chans[l], kernels[l]});
    for (auto& v : wl.values()) v = static_cast<float>(rng.uniform(-0.1, 0.1));
    w.push_back(wl);
    b.emplace_back(Shape{chans[l + 1]});
  }
  Tensor<float> x(Shape{B, 3, L});
  for (auto& v : x.values()) v = static_cast<float>(rng.normal());
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Tensor<float>> acts{x};
  for (int l = 0; l < 7; ++l) acts.push_back(relu(conv1d(acts.back(), w[l], b[l], std::size_t{1} << l)));
  auto t1 = std::chrono::steady_clock::now();
  Tensor<float> dy(acts.back().shape(), 0.01f);
  for (int l = 6; l >= 0; --l) {
    auto g = conv1d_backward(acts[l], w[l], std::size_t{1} << l, Padding::Same, dy, l > 0);
    dy = g.input;
  }
  auto t2 = std::chrono::steady_clock::now();
  std::printf("forward %.2f ms/window, backward %.2f ms/window\n",
              std::chrono::duration<double, std::milli>(t1 - t0).count() / B,
              std::chrono::duration<double, std::milli>(t2 - t1).count() / B);
}
