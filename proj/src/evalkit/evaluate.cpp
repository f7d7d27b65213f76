#include "magloc/evalkit/evaluate.hpp"

#include "magloc/errors.hpp"
#include "magloc/evalkit/predict.hpp"
#include "magloc/util/text.hpp"

namespace magloc::evalkit {

nlohmann::json EvalOptions::to_json() const {
  return {{"stride", stride}, {"gravity_alpha", gravity_alpha}, {"mae", to_string(mae)}};
}

EvalOptions EvalOptions::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("eval must be a JSON object");
  EvalOptions o;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "stride") o.stride = value.get<std::size_t>();
      else if (key == "gravity_alpha") o.gravity_alpha = value.get<double>();
      else if (key == "mae") o.mae = mae_kind_from_string(value.get<std::string>());
      else throw ConfigError("unknown key 'eval." + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("eval config: ") + e.what());
  }
  if (o.stride < 1) throw ConfigError("eval.stride must be >= 1");
  if (!(o.gravity_alpha > 0.0 && o.gravity_alpha <= 1.0)) throw ConfigError("eval.gravity_alpha must lie in (0, 1]");
  return o;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json audit_json = nlohmann::json::array();
  for (const auto& a : audit) audit_json.push_back(a.to_json());
  return {{"building", building},
          {"mode", features::to_string(mode)},
          {"scenario", scenario.to_json()},
          {"scenario_label", scenario.label()},
          {"mae_kind", to_string(mae_kind)},
          {"mae_m", mae_m},
          {"window_count", window_count},
          {"median_m", median_m},
          {"p90_m", p90_m},
          {"warnings", warnings},
          {"perturbation_audit", audit_json}};
}

std::string EvalReport::csv_header() { return "building,mode,scenario,mae_m,window_count,median_m,p90_m"; }

std::string EvalReport::csv_row() const {
  return building + "," + features::to_string(mode) + ",\"" + scenario.label() + "\"," +
         util::format_significant(mae_m, 6) + "," + std::to_string(window_count) + "," +
         util::format_significant(median_m, 6) + "," + util::format_significant(p90_m, 6);
}

void check_mode(const magnet::Model& model, features::Mode mode) {
  if (!model.stats) throw ConfigError("model has no input statistics; was it trained?");
  if (model.stats->names != features::channel_names(mode)) {
    std::string have;
    for (const auto& n : model.stats->names) have += (have.empty() ? "" : ",") + n;
    throw ConfigError("mode mismatch: model was trained on channels " + have + " but evaluation mode is " +
                      features::to_string(mode));
  }
}

EvalReport evaluate(const magnet::Model& model, features::Mode mode, const std::vector<data::Trial>& test,
                    const perturb::Scenario& scenario, const EvalOptions& options) {
  check_mode(model, mode);
  scenario.validate();
  EvalReport r;
  r.mode = mode;
  r.scenario = scenario;
  r.mae_kind = options.mae;
  if (!test.empty()) r.building = test.front().building;

  auto perturbed = perturb::apply_scenario({}, test, scenario);
  r.audit = std::move(perturbed.audit);
  // Only the test side is perturbed here; the empty train side is expected.
  for (auto& w : perturbed.warnings)
    if (w.find("empty train split") == std::string::npos) r.warnings.push_back(std::move(w));
  features::WindowOptions o;
  o.mode = mode;
  o.stride = options.stride;
  o.gravity_alpha = options.gravity_alpha;
  auto w = features::make_windows(perturbed.test, o);
  r.warnings.insert(r.warnings.end(), w.warnings.begin(), w.warnings.end());
  if (w.set.empty()) throw DataError("no test windows");
  features::standardize(w.set, *model.stats);

  const auto errors = window_errors(predict_windows(model, w.set), targets_of(w.set), options.mae);
  r.window_count = errors.size();
  r.mae_m = mean(errors);
  r.median_m = quantile(errors, 0.5);
  r.p90_m = quantile(errors, 0.9);
  return r;
}

}  // namespace magloc::evalkit
