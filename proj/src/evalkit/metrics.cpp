#include "magloc/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "magloc/errors.hpp"

namespace magloc::evalkit {

std::string to_string(MaeKind kind) {
  return kind == MaeKind::Euclidean ? "euclidean" : "per_coordinate";
}

MaeKind mae_kind_from_string(const std::string& s) {
  if (s == "euclidean") return MaeKind::Euclidean;
  if (s == "per_coordinate") return MaeKind::PerCoordinate;
  throw ConfigError("unknown MAE kind '" + s + "' (expected euclidean or per_coordinate)");
}

std::vector<double> window_errors(std::span<const Point> predictions, std::span<const Point> truths,
                                  MaeKind kind) {
  require(!predictions.empty(), "mae: no predictions");
  require(predictions.size() == truths.size(),
          "mae: " + std::to_string(predictions.size()) + " predictions vs " + std::to_string(truths.size()) +
              " truths");
  std::vector<double> errors(predictions.size());
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double dx = predictions[i][0] - truths[i][0];
    const double dy = predictions[i][1] - truths[i][1];
    errors[i] = kind == MaeKind::Euclidean ? std::hypot(dx, dy) : 0.5 * (std::abs(dx) + std::abs(dy));
  }
  return errors;
}

double mae(std::span<const Point> predictions, std::span<const Point> truths, MaeKind kind) {
  const auto errors = window_errors(predictions, truths, kind);
  return mean(errors);
}

namespace {

double compensated_sum(std::span<const double> values, double shift) {
  double sum = 0.0, carry = 0.0;
  for (double x : values) {
    const double v = x - shift;
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + carry;
}

}  // namespace

double mean(std::span<const double> values) {
  require(!values.empty(), "mean of an empty sample");
  const double n = static_cast<double>(values.size());
  // Second pass over the residuals removes the rounding of sum / n, so a
  // constant sample averages to itself exactly.
  const double m = compensated_sum(values, 0.0) / n;
  return m + compensated_sum(values, m) / n;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace magloc::evalkit
