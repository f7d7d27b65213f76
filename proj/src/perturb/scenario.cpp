#include "magloc/perturb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "magloc/errors.hpp"
#include "magloc/numkit/random.hpp"
#include "magloc/util/text.hpp"

namespace magloc::perturb {

using geometry::Rotation;
using geometry::Vec3;

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::None: return "None";
    case Kind::FixedTest: return "FixedTest";
    case Kind::FixedMagnitudeBoth: return "FixedMagnitudeBoth";
    case Kind::RandomTest: return "RandomTest";
    case Kind::RandomBoth: return "RandomBoth";
  }
  return "?";
}

Kind kind_from_string(const std::string& s) {
  for (Kind k : {Kind::None, Kind::FixedTest, Kind::FixedMagnitudeBoth, Kind::RandomTest, Kind::RandomBoth})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown scenario kind '" + s + "'");
}

void Scenario::validate() const {
  std::vector<std::string> problems;
  if (!(sigma_deg >= 0.0) || !std::isfinite(sigma_deg)) problems.push_back("sigma_deg must be >= 0");
  if (!(period_s > 0.0) || !std::isfinite(period_s)) problems.push_back("period_s must be > 0");
  if (!std::isfinite(angle_deg)) problems.push_back("angle_deg must be finite");
  if (kind == Kind::FixedTest) {
    if (axes.empty()) problems.push_back("FixedTest axes must be nonempty");
    for (char c : axes)
      if (c != 'x' && c != 'y' && c != 'z') problems.push_back(std::string("unknown axis '") + c + "'");
  }
  if (problems.empty()) return;
  std::string msg = "invalid scenario:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw ConfigError(msg);
}

std::string Scenario::label() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case Kind::None: break;
    case Kind::FixedTest: os << "{" << axes << "," << util::format_significant(angle_deg, 6) << "deg}"; break;
    case Kind::FixedMagnitudeBoth: os << "{" << util::format_significant(sigma_deg, 6) << "deg}"; break;
    default:
      os << "{" << util::format_significant(sigma_deg, 6) << "deg,T=" << util::format_significant(period_s, 6)
         << "s}";
  }
  return os.str();
}

Scenario Scenario::from_json(const nlohmann::json& j) {
  Scenario s;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "kind") s.kind = kind_from_string(value.get<std::string>());
      else if (key == "sigma_deg") s.sigma_deg = value.get<double>();
      else if (key == "period_s") s.period_s = value.get<double>();
      else if (key == "axes") {
        if (value.is_array()) {
          s.axes.clear();
          for (const auto& a : value) s.axes += a.get<std::string>();
        } else {
          s.axes = value.get<std::string>();
        }
      } else if (key == "angle_deg") s.angle_deg = value.get<double>();
      else if (key == "seed") s.seed = value.get<std::uint64_t>();
      else throw ConfigError("scenario: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json Scenario::to_json() const {
  return {{"kind", to_string(kind)}, {"sigma_deg", sigma_deg}, {"period_s", period_s},
          {"axes", axes},            {"angle_deg", angle_deg}, {"seed", seed}};
}

nlohmann::json AuditRecord::to_json() const {
  nlohmann::json j{{"split", split}, {"building", building}, {"trial_id", trial_id}, {"seed", seed}};
  if (knots) {
    j["sigma_deg"] = knots->sigma_deg;
    j["period_s"] = knots->period_s;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& a : knots->angles) rows.push_back({a.roll, a.pitch, a.yaw});
    j["knots"] = rows;
  }
  if (constant) j["quaternion"] = {constant->w(), constant->x(), constant->y(), constant->z()};
  return j;
}

std::uint64_t trial_seed(const Scenario& scenario, const data::Trial& trial) {
  return numkit::derive_seed(scenario.seed,
                             numkit::fnv1a64(trial.building + "/" + std::to_string(trial.trial_id)));
}

namespace {

data::Trial rotate_with(const data::Trial& trial, const auto& rotation_at) {
  data::Trial out = trial;
  if (out.records.empty()) return out;
  const double t0 = out.records.front().t;
  for (auto& r : out.records) {
    const Rotation rot = rotation_at(r.t - t0);
    if (rot.is_identity()) continue;
    r.mag = rot.apply(r.mag);
    r.acc = rot.apply(r.acc);
  }
  return out;
}

Rotation fixed_test_rotation(const Scenario& s) {
  const auto has = [&](char c) { return s.axes.find(c) != std::string::npos; };
  return geometry::rot_from_euler(has('x') ? s.angle_deg : 0.0, has('y') ? s.angle_deg : 0.0,
                                  has('z') ? s.angle_deg : 0.0);
}

// Rotation of magnitude sigma about a uniformly random axis.
Rotation random_axis_rotation(double sigma_deg, std::uint64_t seed) {
  numkit::Rng rng(seed);
  while (true) {
    const Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
    if (geometry::norm(axis) > 1e-6) return sigma_deg == 0.0 ? Rotation() : Rotation::about_axis(axis, sigma_deg);
  }
}

void perturb_split(const std::vector<data::Trial>& in, std::vector<data::Trial>& out, const char* split,
                   const Scenario& s, std::vector<AuditRecord>& audit) {
  out.reserve(in.size());
  for (const auto& trial : in) {
    AuditRecord rec{split, trial.building, trial.trial_id, trial_seed(s, trial), {}, {}};
    switch (s.kind) {
      case Kind::None: rec.constant = Rotation(); out.push_back(trial); break;
      case Kind::FixedTest:
        rec.constant = fixed_test_rotation(s);
        out.push_back(rotate_trial(trial, *rec.constant));
        break;
      case Kind::FixedMagnitudeBoth:
        rec.constant = random_axis_rotation(s.sigma_deg, rec.seed);
        out.push_back(rotate_trial(trial, *rec.constant));
        break;
      case Kind::RandomTest:
      case Kind::RandomBoth: {
        const double duration = std::max(trial.duration(), s.period_s);
        const auto schedule = geometry::sample_schedule(s.sigma_deg, s.period_s, duration, rec.seed);
        rec.knots = schedule.knots();
        out.push_back(rotate_trial(trial, schedule));
        break;
      }
    }
    audit.push_back(std::move(rec));
  }
}

}  // namespace

data::Trial rotate_trial(const data::Trial& trial, const geometry::RotationSchedule& schedule) {
  return rotate_with(trial, [&](double t) { return schedule.rotation_at(t); });
}

data::Trial rotate_trial(const data::Trial& trial, const geometry::Rotation& rotation) {
  return rotate_with(trial, [&](double) { return rotation; });
}

PerturbResult apply_scenario(const std::vector<data::Trial>& train, const std::vector<data::Trial>& test,
                             const Scenario& scenario) {
  scenario.validate();
  PerturbResult result;
  if (train.empty()) result.warnings.push_back("apply_scenario: empty train split passed through");
  if (test.empty()) result.warnings.push_back("apply_scenario: empty test split passed through");

  if (scenario.perturbs_train()) {
    perturb_split(train, result.train, "train", scenario, result.audit);
  } else {
    result.train = train;
  }
  perturb_split(test, result.test, "test", scenario, result.audit);
  return result;
}

std::vector<Scenario> scenario_catalog(const std::vector<double>& sigmas_deg, const std::vector<Kind>& kinds,
                                       std::uint64_t master_seed, double period_s) {
  for (double s : sigmas_deg)
    if (!(s >= 0.0)) throw ConfigError("scenario_catalog: sigma values must be >= 0");
  std::vector<Scenario> out;
  for (Kind kind : kinds) {
    for (double sigma : sigmas_deg) {
      Scenario s;
      s.kind = kind;
      s.period_s = period_s;
      if (kind == Kind::FixedTest) {
        s.angle_deg = sigma;
      } else {
        s.sigma_deg = sigma;
      }
      s.seed = numkit::derive_seed(master_seed, out.size());
      s.validate();
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace magloc::perturb
