#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"

namespace magloc::data {

/// mu0 / 4pi expressed in uT m^3 / (A m^2).
inline constexpr double kDipoleScale = 0.1;
inline constexpr double kGravity = 9.81;

struct SynthConfig {
  std::string name = "synthetic-a";
  double width_m = 40.0;   // building spans [0, width] x [0, depth]
  double depth_m = 20.0;
  Vec3 earth_field{22.0, 0.0, -42.0};  // uT, world frame (x east, y north, z up)
  int dipole_count = 8;
  double moment_scale = 600.0;  // A m^2
  double dipole_margin_m = 2.0;  // inflation of the box in x and y
  double dipole_min_depth_m = 0.6;  // below the floor plane z = 0
  double dipole_max_depth_m = 2.0;
  int waypoint_count = 12;
  double walking_speed = 1.2;  // m/s
  double acc_noise = 0.05;     // m/s^2
  double mag_noise = 0.2;      // uT
  int trial_count = 6;
  double trial_duration_s = 90.0;
  double device_height_m = 1.0;
  bool heading_aligned = true;
  std::uint64_t seed = 7;

  /// Throws ConfigError listing every violated constraint.
  void validate() const;
  static SynthConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Dipole {
  Vec3 position;  // m
  Vec3 moment;    // A m^2
};

/// (3 r_hat (m . r_hat) - m) / |r|^3 times kDipoleScale, with r = point - position.
Vec3 dipole_field(const Dipole& dipole, const Vec3& point);

struct FieldModel {
  Vec3 earth_field;
  std::vector<Dipole> dipoles;

  Vec3 field_at(const Vec3& point) const;
};

/// Dipoles and the walking route, both deterministic in the seed.
struct SynthLayout {
  FieldModel field;
  std::vector<Vec3> route;  // closed loop of waypoints at device height
};

SynthLayout synth_layout(const SynthConfig& config);

/// Specific force reads (0, 0, -9.81) in the world frame for a static device.
BuildingSet synth_generate(const SynthConfig& config);

}  // namespace magloc::data
