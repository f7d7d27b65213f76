#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/evalkit/evaluate.hpp"
#include "magloc/magnet/config.hpp"

namespace magloc::evalkit {

/// "3D-S", "2D-XL", ...
std::string series_name(features::Mode mode, magnet::Variant variant);

struct SweepSpec {
  std::vector<double> sigmas_deg;  // nonempty, ascending
  perturb::Kind kind = perturb::Kind::RandomTest;
  std::vector<features::Mode> modes{features::Mode::Raw3d, features::Mode::Inv2d};
  std::vector<magnet::Variant> variants{magnet::Variant::S};
  double period_s = 1.0;
  std::uint64_t seed = 0;
  // Evaluate inv2d at the first grid point only and copy the value along the
  // grid; such series carry replicated = true.
  bool replicate_invariant = false;
  EvalOptions eval;

  void validate() const;  // throws ConfigError
};

struct Series {
  std::string name;
  features::Mode mode = features::Mode::Raw3d;
  magnet::Variant variant = magnet::Variant::S;
  std::vector<double> mae_m;  // NaN where failed
  std::vector<bool> failed;
  bool replicated = false;

  bool operator==(const Series&) const = default;
};

struct SweepResult {
  std::string building;
  perturb::Kind kind = perturb::Kind::RandomTest;
  std::vector<double> sigmas_deg;
  std::vector<Series> series;
  std::vector<std::string> errors;  // one line per failed point

  const Series& get(const std::string& name) const;  // throws ContractError
  /// {building}_{kind}_{modes}, the stem of this sweep's CSV and SVG.
  std::string file_stem() const;
  nlohmann::json to_json() const;
  static SweepResult from_json(const nlohmann::json& j);
  bool operator==(const SweepResult&) const = default;
};

/// Returns the model to evaluate for (mode, variant) trained under
/// `train_scenario` (kind None for the unperturbed baseline).
using ModelProvider =
    std::function<magnet::Model(features::Mode, magnet::Variant, const perturb::Scenario& train_scenario)>;

/// Test-only kinds (FixedTest, RandomTest, None) request one unperturbed
/// model per (mode, variant) and reuse it across the grid; RandomBoth and
/// FixedMagnitudeBoth request a model per grid point. Test scenarios come
/// from scenario_catalog(sigmas, {kind}, seed, period), shared by every
/// series. A failing point is recorded and the sweep goes on.
SweepResult sweep(const SweepSpec& spec, const std::vector<data::Trial>& test, const ModelProvider& provider);

struct ThresholdResult {
  std::string building;
  std::string label;                 // e.g. "RandomTest 3D-S/2D-S"
  std::optional<double> threshold_deg;  // empty: no threshold <= max sigma
  double mae3d_m = 0.0;              // both series at the threshold (interpolated)
  double mae2d_m = 0.0;

  std::string describe() const;
  nlohmann::json to_json() const;
  bool operator==(const ThresholdResult&) const = default;
};

/// Smallest sigma with MAE_2D <= MAE_3D: 0 if it holds at the first grid
/// point, else linear interpolation of (MAE_3D - MAE_2D) across the first
/// sign change. Grid points where either series is NaN are skipped.
ThresholdResult find_threshold(const std::vector<double>& sigmas_deg, const std::vector<double>& mae3d,
                               const std::vector<double>& mae2d, const std::string& building = "");
ThresholdResult find_threshold(const SweepResult& sweep, const std::string& series3d, const std::string& series2d);

}  // namespace magloc::evalkit
