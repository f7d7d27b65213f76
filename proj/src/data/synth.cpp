#include "magloc/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "magloc/errors.hpp"
#include "magloc/geometry/rotation.hpp"
#include "magloc/numkit/random.hpp"

namespace magloc::data {

namespace {

using numkit::derive_seed;
using numkit::Rng;

enum Salt : std::uint64_t { kDipoleSalt = 1, kRouteSalt = 2, kTrialSalt = 100 };

Vec3 random_unit(Rng& rng) {
  while (true) {
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const double n = geometry::norm(v);
    if (n > 1e-6) return v * (1.0 / n);
  }
}

struct Polyline {
  std::vector<Vec3> points;  // closed: last segment returns to points[0]
  std::vector<double> cumulative;
  double length = 0.0;

  explicit Polyline(std::vector<Vec3> pts) : points(std::move(pts)) {
    cumulative.push_back(0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      length += geometry::norm(points[(i + 1) % points.size()] - points[i]);
      cumulative.push_back(length);
    }
  }

  // Position and unit direction at arc length s (wrapped).
  std::pair<Vec3, Vec3> at(double s) const {
    s = std::fmod(s, length);
    if (s < 0.0) s += length;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    std::size_t seg = static_cast<std::size_t>(it - cumulative.begin()) - 1;
    seg = std::min(seg, points.size() - 1);
    const Vec3 a = points[seg];
    const Vec3 b = points[(seg + 1) % points.size()];
    const double len = cumulative[seg + 1] - cumulative[seg];
    const Vec3 dir = (b - a) * (1.0 / len);
    return {a + dir * (s - cumulative[seg]), dir};
  }
};

}  // namespace

void SynthConfig::validate() const {
  std::vector<std::string> problems;
  if (!(width_m > 0.0) || !(depth_m > 0.0)) problems.push_back("building extents must be positive");
  if (dipole_count < 0) problems.push_back("dipole_count must be >= 0");
  if (!(moment_scale >= 0.0)) problems.push_back("moment_scale must be >= 0");
  if (!(dipole_margin_m >= 0.0)) problems.push_back("dipole_margin_m must be >= 0");
  if (!(dipole_min_depth_m > 0.0) || !(dipole_max_depth_m >= dipole_min_depth_m))
    problems.push_back("dipole depths must satisfy 0 < min <= max");
  if (waypoint_count < 3) problems.push_back("waypoint_count must be >= 3");
  if (!(walking_speed > 0.0)) problems.push_back("walking_speed must be > 0");
  if (!(acc_noise >= 0.0) || !(mag_noise >= 0.0)) problems.push_back("noise sigmas must be >= 0");
  if (trial_count < 1) problems.push_back("trial_count must be >= 1");
  if (!(trial_duration_s > 0.0)) problems.push_back("trial_duration_s must be > 0");
  if (name.rfind("synthetic", 0) != 0) problems.push_back("name must start with 'synthetic'");
  if (problems.empty()) return;
  std::string msg = "invalid synth config:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw ConfigError(msg);
}

SynthConfig SynthConfig::from_json(const nlohmann::json& j) {
  SynthConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "name") c.name = value.get<std::string>();
      else if (key == "width_m") c.width_m = value.get<double>();
      else if (key == "depth_m") c.depth_m = value.get<double>();
      else if (key == "earth_field") c.earth_field = {value.at(0).get<double>(), value.at(1).get<double>(), value.at(2).get<double>()};
      else if (key == "dipole_count") c.dipole_count = value.get<int>();
      else if (key == "moment_scale") c.moment_scale = value.get<double>();
      else if (key == "dipole_margin_m") c.dipole_margin_m = value.get<double>();
      else if (key == "dipole_min_depth_m") c.dipole_min_depth_m = value.get<double>();
      else if (key == "dipole_max_depth_m") c.dipole_max_depth_m = value.get<double>();
      else if (key == "waypoint_count") c.waypoint_count = value.get<int>();
      else if (key == "walking_speed") c.walking_speed = value.get<double>();
      else if (key == "acc_noise") c.acc_noise = value.get<double>();
      else if (key == "mag_noise") c.mag_noise = value.get<double>();
      else if (key == "trial_count") c.trial_count = value.get<int>();
      else if (key == "trial_duration_s") c.trial_duration_s = value.get<double>();
      else if (key == "device_height_m") c.device_height_m = value.get<double>();
      else if (key == "heading_aligned") c.heading_aligned = value.get<bool>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("synth: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json SynthConfig::to_json() const {
  return {{"name", name},
          {"width_m", width_m},
          {"depth_m", depth_m},
          {"earth_field", {earth_field.x, earth_field.y, earth_field.z}},
          {"dipole_count", dipole_count},
          {"moment_scale", moment_scale},
          {"dipole_margin_m", dipole_margin_m},
          {"dipole_min_depth_m", dipole_min_depth_m},
          {"dipole_max_depth_m", dipole_max_depth_m},
          {"waypoint_count", waypoint_count},
          {"walking_speed", walking_speed},
          {"acc_noise", acc_noise},
          {"mag_noise", mag_noise},
          {"trial_count", trial_count},
          {"trial_duration_s", trial_duration_s},
          {"device_height_m", device_height_m},
          {"heading_aligned", heading_aligned},
          {"seed", seed}};
}

Vec3 dipole_field(const Dipole& dipole, const Vec3& point) {
  const Vec3 r = point - dipole.position;
  const double d = geometry::norm(r);
  if (d < 1e-9) throw ContractError("field evaluated at a dipole location");
  const Vec3 rhat = r * (1.0 / d);
  const Vec3 b = rhat * (3.0 * geometry::dot(dipole.moment, rhat)) - dipole.moment;
  return b * (kDipoleScale / (d * d * d));
}

Vec3 FieldModel::field_at(const Vec3& point) const {
  Vec3 b = earth_field;
  for (const auto& d : dipoles) b += dipole_field(d, point);
  return b;
}

SynthLayout synth_layout(const SynthConfig& config) {
  config.validate();
  SynthLayout layout;
  layout.field.earth_field = config.earth_field;

  Rng drng(derive_seed(config.seed, kDipoleSalt));
  const double m = config.dipole_margin_m;
  for (int i = 0; i < config.dipole_count; ++i) {
    Dipole d;
    // Open intervals keep every dipole strictly inside the inflated box.
    const double ux = 0.02 + 0.96 * drng.uniform();
    const double uy = 0.02 + 0.96 * drng.uniform();
    d.position = {-m + ux * (config.width_m + 2 * m), -m + uy * (config.depth_m + 2 * m),
                  -drng.uniform(config.dipole_min_depth_m, config.dipole_max_depth_m)};
    d.moment = random_unit(drng) * (config.moment_scale * drng.uniform(0.5, 1.5));
    layout.field.dipoles.push_back(d);
  }

  // Loop around the centre: evenly spread angles with jitter, radii inside the
  // building so a scaled copy of the route still fits.
  Rng rrng(derive_seed(config.seed, kRouteSalt));
  const double cx = config.width_m / 2, cy = config.depth_m / 2;
  const int n = config.waypoint_count;
  const double step = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    const double angle = step * (i + rrng.uniform(-0.3, 0.3));
    const double radius = rrng.uniform(0.45, 0.85);
    layout.route.push_back({cx + radius * (cx - 0.5) * std::cos(angle),
                            cy + radius * (cy - 0.5) * std::sin(angle), config.device_height_m});
  }
  return layout;
}

BuildingSet synth_generate(const SynthConfig& config) {
  const SynthLayout layout = synth_layout(config);
  const Vec3 center{config.width_m / 2, config.depth_m / 2, config.device_height_m};
  const Vec3 gravity_world{0.0, 0.0, -kGravity};

  BuildingSet set;
  set.building = config.name;
  set.size_class = size_class_of(config.name);
  const auto samples = static_cast<std::size_t>(std::floor(config.trial_duration_s * kTargetRateHz + 1e-9)) + 1;

  for (int k = 0; k < config.trial_count; ++k) {
    Rng rng(derive_seed(config.seed, kTrialSalt + static_cast<std::uint64_t>(k)));
    const std::size_t n = layout.route.size();
    const std::size_t start = rng.below(n);
    const bool reverse = rng.uniform() < 0.5;
    const double scale = rng.uniform(0.92, 1.08);
    const double speed = config.walking_speed * rng.uniform(0.9, 1.1);

    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t idx = reverse ? (start + n - i) % n : (start + i) % n;
      pts.push_back(center + (layout.route[idx] - center) * scale);
    }
    const Polyline path(std::move(pts));

    Trial trial;
    trial.building = config.name;
    trial.trial_id = k + 1;
    trial.sample_rate_hz = kTargetRateHz;
    trial.records.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      const double t = static_cast<double>(s) / kTargetRateHz;
      const auto [pos, dir] = path.at(speed * t);
      geometry::Rotation device;
      if (config.heading_aligned) {
        const double yaw = std::atan2(dir.y, dir.x) * 180.0 / std::numbers::pi;
        device = geometry::rot_from_euler(0.0, 0.0, yaw);
      }
      const auto to_sensor = device.inverse();
      SampleRecord r;
      r.t = t;
      r.pos = pos;
      r.mag = to_sensor.apply(layout.field.field_at(pos));
      r.acc = to_sensor.apply(gravity_world);
      if (config.mag_noise > 0.0)
        r.mag += Vec3{rng.normal(), rng.normal(), rng.normal()} * config.mag_noise;
      if (config.acc_noise > 0.0)
        r.acc += Vec3{rng.normal(), rng.normal(), rng.normal()} * config.acc_noise;
      trial.records.push_back(r);
    }
    set.trials.push_back(std::move(trial));
  }
  // The building footprint, not the walked area.
  set.bbox = {0.0, 0.0, config.width_m, config.depth_m};
  return set;
}

}  // namespace magloc::data
