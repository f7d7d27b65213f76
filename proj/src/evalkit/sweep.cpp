#include "magloc/evalkit/sweep.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "magloc/errors.hpp"
#include "magloc/util/text.hpp"

namespace magloc::evalkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string series_name(features::Mode mode, magnet::Variant variant) {
  return std::string(mode == features::Mode::Raw3d ? "3D" : "2D") + "-" + magnet::to_string(variant);
}

void SweepSpec::validate() const {
  if (sigmas_deg.empty()) throw ConfigError("sweep sigma grid is empty");
  for (std::size_t i = 0; i < sigmas_deg.size(); ++i) {
    if (!(sigmas_deg[i] >= 0.0)) throw ConfigError("sweep sigma grid values must be >= 0");
    if (i > 0 && !(sigmas_deg[i] > sigmas_deg[i - 1])) throw ConfigError("sweep sigma grid must be strictly ascending");
  }
  if (modes.empty()) throw ConfigError("sweep needs at least one mode");
  if (variants.empty()) throw ConfigError("sweep needs at least one variant");
  if (!(period_s > 0.0)) throw ConfigError("sweep period_s must be > 0");
}

const Series& SweepResult::get(const std::string& name) const {
  for (const auto& s : series)
    if (s.name == name) return s;
  throw ContractError("sweep has no series '" + name + "'");
}

std::string SweepResult::file_stem() const {
  bool raw = false, inv = false;
  for (const auto& s : series) (s.mode == features::Mode::Raw3d ? raw : inv) = true;
  const std::string modes = raw && inv ? "raw3d-inv2d" : (raw ? "raw3d" : "inv2d");
  return building + "_" + perturb::to_string(kind) + "_" + modes;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json j{{"building", building}, {"kind", perturb::to_string(kind)}, {"sigmas_deg", sigmas_deg},
                   {"errors", errors}};
  j["series"] = nlohmann::json::array();
  for (const auto& s : series) {
    nlohmann::json mae = nlohmann::json::array();
    for (double v : s.mae_m) mae.push_back(number_or_null(v));
    std::vector<bool> failed(s.failed.begin(), s.failed.end());
    j["series"].push_back({{"name", s.name},
                           {"mode", features::to_string(s.mode)},
                           {"variant", magnet::to_string(s.variant)},
                           {"mae_m", mae},
                           {"failed", failed},
                           {"replicated", s.replicated}});
  }
  return j;
}

SweepResult SweepResult::from_json(const nlohmann::json& j) {
  SweepResult r;
  try {
    r.building = j.at("building").get<std::string>();
    r.kind = perturb::kind_from_string(j.at("kind").get<std::string>());
    r.sigmas_deg = j.at("sigmas_deg").get<std::vector<double>>();
    r.errors = j.value("errors", std::vector<std::string>{});
    for (const auto& s : j.at("series")) {
      Series out;
      out.name = s.at("name").get<std::string>();
      out.mode = features::mode_from_string(s.at("mode").get<std::string>());
      out.variant = magnet::variant_from_string(s.at("variant").get<std::string>());
      for (const auto& v : s.at("mae_m")) out.mae_m.push_back(v.is_null() ? kNaN : v.get<double>());
      for (const auto& f : s.at("failed")) out.failed.push_back(f.get<bool>());
      out.replicated = s.value("replicated", false);
      if (out.mae_m.size() != r.sigmas_deg.size() || out.failed.size() != r.sigmas_deg.size()) {
        throw DataError("sweep series '" + out.name + "' length does not match the sigma grid");
      }
      r.series.push_back(std::move(out));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed sweep result: ") + e.what());
  }
  return r;
}

SweepResult sweep(const SweepSpec& spec, const std::vector<data::Trial>& test, const ModelProvider& provider) {
  spec.validate();
  SweepResult r;
  r.kind = spec.kind;
  r.sigmas_deg = spec.sigmas_deg;
  if (!test.empty()) r.building = test.front().building;
  const auto scenarios = perturb::scenario_catalog(spec.sigmas_deg, {spec.kind}, spec.seed, spec.period_s);
  const bool retrain = scenarios.front().perturbs_train();

  for (const auto variant : spec.variants) {
    for (const auto mode : spec.modes) {
      Series s;
      s.name = series_name(mode, variant);
      s.mode = mode;
      s.variant = variant;
      s.mae_m.assign(spec.sigmas_deg.size(), kNaN);
      s.failed.assign(spec.sigmas_deg.size(), false);
      s.replicated = spec.replicate_invariant && mode == features::Mode::Inv2d;
      std::optional<magnet::Model> shared;
      std::string shared_error;
      if (!retrain) {
        try {
          shared = provider(mode, variant, perturb::Scenario{});
        } catch (const std::exception& e) {
          shared_error = e.what();
        }
      }
      for (std::size_t i = 0; i < scenarios.size(); ++i) {
        if (s.replicated && i > 0) {
          s.mae_m[i] = s.mae_m[0];
          s.failed[i] = s.failed[0];
          continue;
        }
        try {
          if (!retrain && !shared) throw std::runtime_error("training failed: " + shared_error);
          const magnet::Model model = retrain ? provider(mode, variant, scenarios[i]) : *shared;
          s.mae_m[i] = evaluate(model, mode, test, scenarios[i], spec.eval).mae_m;
        } catch (const std::exception& e) {
          s.failed[i] = true;
          r.errors.push_back(s.name + " at sigma " + util::format_significant(spec.sigmas_deg[i], 6) + ": " + e.what());
        }
      }
      r.series.push_back(std::move(s));
    }
  }
  return r;
}

std::string ThresholdResult::describe() const {
  if (!threshold_deg) return building + " " + label + ": no threshold <= max sigma";
  return building + " " + label + ": threshold " + util::format_significant(*threshold_deg, 6) + " deg (3D " +
         util::format_significant(mae3d_m, 6) + " m, 2D " + util::format_significant(mae2d_m, 6) + " m)";
}

nlohmann::json ThresholdResult::to_json() const {
  return {{"building", building},
          {"label", label},
          {"threshold_deg", threshold_deg ? nlohmann::json(*threshold_deg) : nlohmann::json(nullptr)},
          {"mae3d_m", number_or_null(mae3d_m)},
          {"mae2d_m", number_or_null(mae2d_m)}};
}

ThresholdResult find_threshold(const std::vector<double>& sigmas_deg, const std::vector<double>& mae3d,
                               const std::vector<double>& mae2d, const std::string& building) {
  require(sigmas_deg.size() == mae3d.size() && sigmas_deg.size() == mae2d.size(),
          "find_threshold: series must be aligned on the sigma grid");
  ThresholdResult r;
  r.building = building;
  r.mae3d_m = kNaN;
  r.mae2d_m = kNaN;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < sigmas_deg.size(); ++i) {
    if (!std::isfinite(mae3d[i]) || !std::isfinite(mae2d[i])) continue;
    const double d = mae3d[i] - mae2d[i];
    if (d >= 0.0) {
      if (!prev) {
        r.threshold_deg = sigmas_deg[i];
        r.mae3d_m = mae3d[i];
        r.mae2d_m = mae2d[i];
        return r;
      }
      const std::size_t p = *prev;
      const double dp = mae3d[p] - mae2d[p];  // < 0
      const double f = -dp / (d - dp);
      r.threshold_deg = sigmas_deg[p] + (sigmas_deg[i] - sigmas_deg[p]) * f;
      r.mae3d_m = mae3d[p] + (mae3d[i] - mae3d[p]) * f;
      r.mae2d_m = mae2d[p] + (mae2d[i] - mae2d[p]) * f;
      return r;
    }
    prev = i;
  }
  return r;
}

ThresholdResult find_threshold(const SweepResult& sweep, const std::string& series3d, const std::string& series2d) {
  auto r = find_threshold(sweep.sigmas_deg, sweep.get(series3d).mae_m, sweep.get(series2d).mae_m, sweep.building);
  r.label = perturb::to_string(sweep.kind) + " " + series3d + "/" + series2d;
  return r;
}

}  // namespace magloc::evalkit
