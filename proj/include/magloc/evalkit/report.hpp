#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "magloc/evalkit/sweep.hpp"

namespace magloc::evalkit {

/// sigma_deg followed by one column per series; 6 significant digits,
/// "failed" for failed points.
std::string sweep_csv(const SweepResult& sweep);
/// Parses sweep_csv output back into (sigmas, series name -> values).
struct SweepTable {
  std::vector<std::string> columns;  // series names
  std::vector<double> sigmas_deg;
  std::vector<std::vector<double>> values;  // per column, NaN for failed
};
SweepTable parse_sweep_csv(const std::string& text);

/// Static line chart: one polyline and one legend entry per series.
std::string sweep_svg(const SweepResult& sweep);

/// building,threshold_deg,mae3d_m,mae2d_m,label. A missing threshold is
/// written as "none".
std::string thresholds_csv(const std::vector<ThresholdResult>& thresholds);

/// Writes {stem}.csv and {stem}.svg per sweep and thresholds.csv when any
/// thresholds are given. Returns the written paths. Throws IoError if the
/// directory cannot be created or written.
std::vector<std::filesystem::path> emit_report(const std::vector<SweepResult>& sweeps,
                                               const std::vector<ThresholdResult>& thresholds,
                                               const std::filesystem::path& out_dir);

}  // namespace magloc::evalkit
