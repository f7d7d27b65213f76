#include "magloc/geometry/schedule.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "magloc/errors.hpp"
#include "magloc/numkit/random.hpp"

namespace magloc::geometry {

RotationSchedule::RotationSchedule(EulerKnots knots) : knots_(std::move(knots)) {
  require(!knots_.angles.empty(), "rotation schedule needs at least one knot");
  require(knots_.period_s > 0.0, "rotation schedule period must be positive");
}

EulerAngles RotationSchedule::angles_at(double t) const {
  const double last = knots_.last_time();
  if (!(t >= 0.0 && t <= last)) {
    throw ContractError("rotation_at: t=" + std::to_string(t) + " outside schedule [0, " +
                        std::to_string(last) + "]");
  }
  const auto& a = knots_.angles;
  if (a.size() == 1) return a.front();
  auto n = static_cast<std::size_t>(std::floor(t / knots_.period_s));
  if (n >= a.size() - 1) n = a.size() - 2;
  // t / period can round across a knot; settle the bracket on the knot times
  // themselves so a query at time_of(n) returns knot n exactly.
  while (n > 0 && t < knots_.time_of(n)) --n;
  while (n + 2 < a.size() && t >= knots_.time_of(n + 1)) ++n;
  const double t0 = knots_.time_of(n);
  if (t == t0) return a[n];
  if (t == knots_.time_of(n + 1)) return a[n + 1];
  const double f = (t - t0) / knots_.period_s;
  auto lerp = [f](double lo, double hi) { return lo + (hi - lo) * f; };
  return {lerp(a[n].roll, a[n + 1].roll), lerp(a[n].pitch, a[n + 1].pitch),
          lerp(a[n].yaw, a[n + 1].yaw)};
}

void RotationSchedule::write_csv(std::ostream& out) const {
  out << "t,roll,pitch,yaw\n" << std::setprecision(17);
  for (std::size_t n = 0; n < knots_.angles.size(); ++n) {
    const auto& a = knots_.angles[n];
    out << knots_.time_of(n) << ',' << a.roll << ',' << a.pitch << ',' << a.yaw << '\n';
  }
}

void RotationSchedule::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_csv(out);
}

RotationSchedule sample_schedule(double sigma_deg, double period_s, double duration_s,
                                 std::uint64_t seed) {
  require(sigma_deg >= 0.0, "sample_schedule: sigma must be >= 0, got " + std::to_string(sigma_deg));
  require(period_s > 0.0, "sample_schedule: period must be > 0");
  require(duration_s > 0.0, "sample_schedule: duration must be > 0");
  const auto count = static_cast<std::size_t>(std::ceil(duration_s / period_s)) + 1;
  EulerKnots knots{sigma_deg, period_s, {}};
  knots.angles.reserve(count);
  numkit::Rng rng(seed);
  for (std::size_t n = 0; n < count; ++n) {
    EulerAngles a;
    a.roll = sigma_deg * rng.normal();
    a.pitch = sigma_deg * rng.normal();
    a.yaw = sigma_deg * rng.normal();
    knots.angles.push_back(a);
  }
  return RotationSchedule(std::move(knots));
}

}  // namespace magloc::geometry
