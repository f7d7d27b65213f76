#include "magloc/geometry/rotation.hpp"

#include <algorithm>
#include <numbers>

#include "magloc/errors.hpp"

namespace magloc::geometry {

double deg_to_rad(double degrees) { return degrees * (std::numbers::pi / 180.0); }

Rotation Rotation::from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  require(n > 0.0 && std::isfinite(n), "rotation quaternion must be finite and nonzero");
  return Rotation(w / n, x / n, y / n, z / n);
}

Rotation Rotation::about_axis(const Vec3& axis, double angle_deg) {
  const double n = geometry::norm(axis);
  require(n > 0.0, "rotation axis must be nonzero");
  const double half = 0.5 * deg_to_rad(angle_deg);
  const double s = std::sin(half) / n;
  return from_quaternion(std::cos(half), axis.x * s, axis.y * s, axis.z * s);
}

Vec3 Rotation::apply(const Vec3& v) const {
  // v' = v + 2w (q x v) + 2 q x (q x v)
  const Vec3 q{x_, y_, z_};
  const Vec3 t = 2.0 * cross(q, v);
  return v + w_ * t + cross(q, t);
}

Rotation Rotation::operator*(const Rotation& r) const {
  return from_quaternion(w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
                         w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
                         w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
                         w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
}

double Rotation::norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

double Rotation::angle_deg() const {
  const double v = std::sqrt(x_ * x_ + y_ * y_ + z_ * z_);
  return 2.0 * std::atan2(v, std::abs(w_)) * (180.0 / std::numbers::pi);
}

Rotation rot_from_euler(double roll_deg, double pitch_deg, double yaw_deg) {
  const double hr = 0.5 * deg_to_rad(roll_deg);
  const double hp = 0.5 * deg_to_rad(pitch_deg);
  const double hy = 0.5 * deg_to_rad(yaw_deg);
  const double cr = std::cos(hr), sr = std::sin(hr);
  const double cp = std::cos(hp), sp = std::sin(hp);
  const double cy = std::cos(hy), sy = std::sin(hy);
  return Rotation::from_quaternion(cr * cp * cy + sr * sp * sy,
                                   sr * cp * cy - cr * sp * sy,
                                   cr * sp * cy + sr * cp * sy,
                                   cr * cp * sy - sr * sp * cy);
}

}  // namespace magloc::geometry
