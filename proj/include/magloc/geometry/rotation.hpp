#pragma once

#include "magloc/geometry/vec3.hpp"

namespace magloc::geometry {

double deg_to_rad(double degrees);

/// Unit quaternion. Construction and composition renormalize, so the norm
/// stays 1 to rounding.
class Rotation {
 public:
  Rotation() = default;  // identity

  static Rotation from_quaternion(double w, double x, double y, double z);
  static Rotation about_axis(const Vec3& axis, double angle_deg);

  Vec3 apply(const Vec3& v) const;
  Rotation inverse() const { return Rotation(w_, -x_, -y_, -z_); }
  /// (a * b).apply(v) == a.apply(b.apply(v))
  Rotation operator*(const Rotation& rhs) const;

  double w() const noexcept { return w_; }
  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double z() const noexcept { return z_; }
  double norm() const;
  bool is_identity() const noexcept { return w_ == 1.0 && x_ == 0.0 && y_ == 0.0 && z_ == 0.0; }
  /// Rotation angle in degrees, in [0, 180].
  double angle_deg() const;

 private:
  Rotation(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Intrinsic Z-Y-X Euler angles in degrees: yaw about z, then pitch about the
/// new y, then roll about the newest x. Equivalently R = Rz(yaw) Ry(pitch) Rx(roll).
Rotation rot_from_euler(double roll_deg, double pitch_deg, double yaw_deg);

inline Vec3 apply(const Rotation& r, const Vec3& v) { return r.apply(v); }

}  // namespace magloc::geometry
