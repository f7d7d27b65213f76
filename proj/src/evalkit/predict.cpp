#include "magloc/evalkit/predict.hpp"

#include <algorithm>
#include <numeric>

namespace magloc::evalkit {

std::vector<Point> predict_windows(const magnet::Model& model, const features::WindowSet& standardized,
                                   std::size_t batch) {
  require(batch > 0, "predict_windows: batch must be positive");
  if (standardized.channels() != model.config().input_channels) {
    throw ShapeError("model expects " + std::to_string(model.config().input_channels) + " channels, windows have " +
                     std::to_string(standardized.channels()));
  }
  std::vector<Point> out;
  out.reserve(standardized.size());
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < standardized.size(); begin += batch) {
    const std::size_t n = std::min(batch, standardized.size() - begin);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), begin);
    const auto pred = model.predict(standardized.gather(idx));
    for (std::size_t b = 0; b < n; ++b) out.push_back({pred[2 * b], pred[2 * b + 1]});
  }
  return out;
}

std::vector<Point> targets_of(const features::WindowSet& windows) {
  std::vector<Point> out(windows.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = windows.target(i);
  return out;
}

}  // namespace magloc::evalkit
