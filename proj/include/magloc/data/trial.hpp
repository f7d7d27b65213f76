#pragma once

#include <string>
#include <vector>

#include "magloc/geometry/vec3.hpp"

namespace magloc::data {

using geometry::Vec3;

inline constexpr double kTargetRateHz = 50.0;

/// One reading: seconds, microtesla (sensor frame), m/s^2 (sensor frame),
/// meters (building frame).
struct SampleRecord {
  double t = 0.0;
  Vec3 mag;
  Vec3 acc;
  Vec3 pos;

  bool operator==(const SampleRecord&) const = default;
};

struct Trial {
  std::string building;
  int trial_id = 0;
  std::string device = "handheld";
  double sample_rate_hz = kTargetRateHz;
  std::vector<SampleRecord> records;
  bool rate_flagged = false;

  double duration() const {
    return records.empty() ? 0.0 : records.back().t - records.front().t;
  }
  bool operator==(const Trial&) const = default;
};

struct BoundingBox {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;

  double diagonal() const;
  bool operator==(const BoundingBox&) const = default;
};

struct BuildingSet {
  std::string building;
  std::string size_class;  // small | medium | large | synthetic
  BoundingBox bbox;
  std::vector<Trial> trials;

  bool operator==(const BuildingSet&) const = default;
};

/// Box spanning every ground-truth (x, y) in the set.
BoundingBox bounding_box_of(const std::vector<Trial>& trials);

/// Median spacing between consecutive timestamps.
double median_spacing(const Trial& trial);

std::string size_class_of(const std::string& building);

}  // namespace magloc::data
