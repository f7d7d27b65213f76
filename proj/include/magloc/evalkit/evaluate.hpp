#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"
#include "magloc/evalkit/metrics.hpp"
#include "magloc/features/windows.hpp"
#include "magloc/magnet/model.hpp"
#include "magloc/perturb/scenario.hpp"

namespace magloc::evalkit {

struct EvalOptions {
  std::size_t stride = 1;
  double gravity_alpha = features::kDefaultGravityAlpha;
  MaeKind mae = MaeKind::Euclidean;

  nlohmann::json to_json() const;
  static EvalOptions from_json(const nlohmann::json& j);
  bool operator==(const EvalOptions&) const = default;
};

struct EvalReport {
  std::string building;
  features::Mode mode = features::Mode::Raw3d;
  perturb::Scenario scenario;
  MaeKind mae_kind = MaeKind::Euclidean;
  double mae_m = 0.0;
  std::size_t window_count = 0;
  double median_m = 0.0;
  double p90_m = 0.0;
  std::vector<perturb::AuditRecord> audit;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Throws ConfigError if the model's input statistics were not fitted for
/// `mode` (or it has none).
void check_mode(const magnet::Model& model, features::Mode mode);

/// Perturbs the test trials per the scenario, re-extracts windows, applies
/// the model's own standardization and scores the predictions.
EvalReport evaluate(const magnet::Model& model, features::Mode mode, const std::vector<data::Trial>& test,
                    const perturb::Scenario& scenario, const EvalOptions& options = {});

}  // namespace magloc::evalkit
