#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "magloc/geometry/rotation.hpp"

namespace magloc::geometry {

struct EulerAngles {
  double roll = 0.0;  // degrees
  double pitch = 0.0;
  double yaw = 0.0;

  bool operator==(const EulerAngles&) const = default;
};

/// Knots at t_n = n * period, each angle drawn from N(0, sigma).
struct EulerKnots {
  double sigma_deg = 0.0;
  double period_s = 1.0;
  std::vector<EulerAngles> angles;

  double time_of(std::size_t n) const { return static_cast<double>(n) * period_s; }
  double last_time() const { return time_of(angles.empty() ? 0 : angles.size() - 1); }
};

/// Time-indexed rotation: each Euler angle is linearly interpolated between
/// neighbouring knots, then converted with rot_from_euler.
class RotationSchedule {
 public:
  explicit RotationSchedule(EulerKnots knots);

  const EulerKnots& knots() const noexcept { return knots_; }
  double duration() const { return knots_.last_time(); }

  /// Interpolated angles at time t in [0, last knot time].
  EulerAngles angles_at(double t) const;
  Rotation rotation_at(double t) const { return from_angles(angles_at(t)); }

  static Rotation from_angles(const EulerAngles& a) { return rot_from_euler(a.roll, a.pitch, a.yaw); }

  /// CSV with header t,roll,pitch,yaw (one row per knot).
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  EulerKnots knots_;
};

/// ceil(duration / period) + 1 knots with independent N(0, sigma) angles per
/// axis. A pure function of its arguments.
RotationSchedule sample_schedule(double sigma_deg, double period_s, double duration_s,
                                 std::uint64_t seed);

}  // namespace magloc::geometry
