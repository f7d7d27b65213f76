#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"
#include "magloc/geometry/schedule.hpp"

namespace magloc::perturb {

enum class Kind { None, FixedTest, FixedMagnitudeBoth, RandomTest, RandomBoth };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& s);  // throws ConfigError

/// Rotations are applied to the readings: mag' = R mag and acc' = R acc,
/// which is what a device rotated by R^-1 would measure.
struct Scenario {
  Kind kind = Kind::None;
  double sigma_deg = 0.0;    // FixedMagnitudeBoth, RandomTest, RandomBoth
  double period_s = 1.0;     // RandomTest, RandomBoth
  std::string axes = "xyz";  // FixedTest: any nonempty subset of "xyz"
  double angle_deg = 0.0;    // FixedTest
  std::uint64_t seed = 0;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
  bool perturbs_train() const { return kind == Kind::FixedMagnitudeBoth || kind == Kind::RandomBoth; }
  bool perturbs_test() const { return kind != Kind::None; }
  /// The scenario's strength on a sweep axis: angle for FixedTest, else sigma.
  double magnitude_deg() const { return kind == Kind::FixedTest ? angle_deg : sigma_deg; }
  std::string label() const;

  static Scenario from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  bool operator==(const Scenario&) const = default;
};

/// The rotation applied to one trial, kept so runs can be audited.
struct AuditRecord {
  std::string split;  // train | test
  std::string building;
  int trial_id = 0;
  std::uint64_t seed = 0;
  std::optional<geometry::EulerKnots> knots;     // random schedules
  std::optional<geometry::Rotation> constant;    // fixed rotations

  nlohmann::json to_json() const;
};

struct PerturbResult {
  std::vector<data::Trial> train;
  std::vector<data::Trial> test;
  std::vector<AuditRecord> audit;
  std::vector<std::string> warnings;
};

/// Per-trial seed: the scenario seed hashed with "building/trial_id", so
/// adding or removing trials never shifts another trial's rotations.
std::uint64_t trial_seed(const Scenario& scenario, const data::Trial& trial);

/// Rotates mag and acc of every sample by rotation_at(t - t_first); positions
/// and timestamps are copied unchanged. Identity rotations leave samples
/// bit-identical.
data::Trial rotate_trial(const data::Trial& trial, const geometry::RotationSchedule& schedule);
data::Trial rotate_trial(const data::Trial& trial, const geometry::Rotation& rotation);

PerturbResult apply_scenario(const std::vector<data::Trial>& train, const std::vector<data::Trial>& test,
                             const Scenario& scenario);

/// kinds x sigmas in that nesting order. Scenario i gets seed
/// derive_seed(master_seed, i). For FixedTest the sigma value is used as
/// the angle on all three axes.
std::vector<Scenario> scenario_catalog(const std::vector<double>& sigmas_deg, const std::vector<Kind>& kinds,
                                       std::uint64_t master_seed, double period_s = 1.0);

}  // namespace magloc::perturb
