#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace magloc::evalkit {

using Point = std::array<double, 2>;

/// How |y - y_hat| is read for one window: the 2D distance (default) or the
/// mean of the absolute coordinate errors.
enum class MaeKind { Euclidean, PerCoordinate };

std::string to_string(MaeKind kind);
MaeKind mae_kind_from_string(const std::string& s);  // throws ConfigError

/// Per-window errors in meters. ContractError on empty or mismatched input.
std::vector<double> window_errors(std::span<const Point> predictions, std::span<const Point> truths,
                                  MaeKind kind = MaeKind::Euclidean);

double mae(std::span<const Point> predictions, std::span<const Point> truths,
           MaeKind kind = MaeKind::Euclidean);

/// Compensated (Neumaier) mean of a nonempty sample.
double mean(std::span<const double> values);

/// Linear-interpolated quantile (q in [0, 1]) of a nonempty sample.
double quantile(std::vector<double> values, double q);

}  // namespace magloc::evalkit
