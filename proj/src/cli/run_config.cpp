#include "magloc/cli/run_config.hpp"

#include "magloc/errors.hpp"
#include "magloc/numkit/random.hpp"

namespace magloc::cli {

namespace {

// Salts for seeds derived from the master seed.
enum : std::uint64_t { kSplitSalt = 1, kTrainSalt = 2, kModelSalt = 3, kScenarioSalt = 4, kSweepSalt = 5 };

void require_object(const nlohmann::json& j, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + " must be a JSON object");
}

template <typename T>
T get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type: " + j.dump());
  }
}

DatasetConfig dataset_from_json(const nlohmann::json& j) {
  require_object(j, "dataset");
  DatasetConfig d;
  for (const auto& [key, value] : j.items()) {
    if (key == "source") {
      d.source = get<std::string>(value, "dataset.source");
      if (d.source != "synth" && d.source != "magpie" && d.source != "normalized") {
        throw ConfigError("dataset.source must be synth, magpie or normalized, got '" + d.source + "'");
      }
    } else if (key == "path") {
      d.path = get<std::string>(value, "dataset.path");
    } else if (key == "column_map") {
      d.column_map = data::ColumnMap::from_json(value);
    } else if (key == "resample") {
      d.resample = get<bool>(value, "dataset.resample");
    } else if (key == "synth") {
      d.synth = data::SynthConfig::from_json(value);
    } else {
      throw ConfigError("unknown key 'dataset." + key + "'");
    }
  }
  if (d.source != "synth" && d.path.empty()) throw ConfigError("dataset.path is required for source " + d.source);
  return d;
}

SweepConfig sweep_from_json(const nlohmann::json& j) {
  require_object(j, "sweep");
  SweepConfig s;
  for (const auto& [key, value] : j.items()) {
    if (key == "kinds") {
      s.kinds.clear();
      for (const auto& k : value) s.kinds.push_back(perturb::kind_from_string(get<std::string>(k, "sweep.kinds")));
    } else if (key == "modes") {
      s.modes.clear();
      for (const auto& m : value) s.modes.push_back(features::mode_from_string(get<std::string>(m, "sweep.modes")));
    } else if (key == "variants") {
      s.variants.clear();
      for (const auto& v : value)
        s.variants.push_back(magnet::variant_from_string(get<std::string>(v, "sweep.variants")));
    } else if (key == "period_s") {
      s.period_s = get<double>(value, "sweep.period_s");
    } else if (key == "replicate_invariant") {
      s.replicate_invariant = get<bool>(value, "sweep.replicate_invariant");
    } else {
      throw ConfigError("unknown key 'sweep." + key + "'");
    }
  }
  if (s.kinds.empty() || s.modes.empty() || s.variants.empty()) {
    throw ConfigError("sweep.kinds, sweep.modes and sweep.variants must be nonempty");
  }
  if (!(s.period_s > 0.0)) throw ConfigError("sweep.period_s must be > 0");
  return s;
}

std::vector<data::TrialKey> exclusions_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "default") return data::default_exclusions();
    throw ConfigError("exclusions must be \"default\" or a list of {building, trial_id}");
  }
  if (!j.is_array()) throw ConfigError("exclusions must be \"default\" or a list of {building, trial_id}");
  std::vector<data::TrialKey> out;
  for (const auto& e : j) {
    require_object(e, "exclusions entry");
    for (const auto& [key, value] : e.items())
      if (key != "building" && key != "trial_id") throw ConfigError("unknown key 'exclusions[]." + key + "'");
    if (!e.contains("building") || !e.contains("trial_id")) {
      throw ConfigError("exclusions entries need building and trial_id");
    }
    out.push_back({get<std::string>(e["building"], "exclusions[].building"), get<int>(e["trial_id"], "exclusions[].trial_id")});
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  require_object(j, "run config");
  RunConfig c;
  c.seed = j.contains("seed") ? get<std::uint64_t>(j["seed"], "seed") : 0;
  c.sigma_grid.clear();
  for (int s = 0; s <= 20; ++s) c.sigma_grid.push_back(s);

  bool split_seed = false, train_seed = false, scenario_seed = false, model_seed = false, sweep_seed = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") continue;
    if (key == "dataset") {
      c.dataset = dataset_from_json(value);
    } else if (key == "building") {
      c.building = get<std::string>(value, key);
    } else if (key == "mode") {
      c.mode = features::mode_from_string(get<std::string>(value, key));
    } else if (key == "variant") {
      c.variant = magnet::variant_from_string(get<std::string>(value, key));
    } else if (key == "padding") {
      const auto p = get<std::string>(value, key);
      if (p == "same") c.padding = numkit::Padding::Same;
      else if (p == "causal") c.padding = numkit::Padding::Causal;
      else throw ConfigError("padding must be same or causal, got '" + p + "'");
    } else if (key == "model_seed") {
      c.model_seed = get<std::uint64_t>(value, key);
      model_seed = true;
    } else if (key == "scenario") {
      require_object(value, "scenario");
      c.scenario = perturb::Scenario::from_json(value);
      scenario_seed = value.contains("seed");
    } else if (key == "split") {
      c.split = trainer::SplitSpec::from_json(value);
      split_seed = value.contains("seed");
    } else if (key == "train") {
      c.train = trainer::TrainConfig::from_json(value);
      train_seed = value.contains("seed");
    } else if (key == "eval") {
      c.eval = evalkit::EvalOptions::from_json(value);
    } else if (key == "sigma_grid") {
      c.sigma_grid = get<std::vector<double>>(value, key);
    } else if (key == "sweep") {
      c.sweep = sweep_from_json(value);
    } else if (key == "sweep_seed") {
      c.sweep_seed = get<std::uint64_t>(value, key);
      sweep_seed = true;
    } else if (key == "output_dir") {
      c.output_dir = get<std::string>(value, key);
    } else if (key == "model") {
      c.model = get<std::string>(value, key);
    } else if (key == "input_dir") {
      c.input_dir = get<std::string>(value, key);
    } else if (key == "exclusions") {
      c.exclusions = exclusions_from_json(value);
    } else if (key == "gravity_alpha") {
      c.gravity_alpha = get<double>(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (!split_seed) c.split.seed = numkit::derive_seed(c.seed, kSplitSalt);
  if (!train_seed) c.train.seed = numkit::derive_seed(c.seed, kTrainSalt);
  if (!model_seed) c.model_seed = numkit::derive_seed(c.seed, kModelSalt);
  if (!scenario_seed) c.scenario.seed = numkit::derive_seed(c.seed, kScenarioSalt);
  if (!sweep_seed) c.sweep_seed = numkit::derive_seed(c.seed, kSweepSalt);
  if (!(c.gravity_alpha > 0.0 && c.gravity_alpha <= 1.0)) throw ConfigError("gravity_alpha must lie in (0, 1]");
  if (c.eval.gravity_alpha != c.gravity_alpha) c.eval.gravity_alpha = c.gravity_alpha;
  if (c.output_dir.empty()) throw ConfigError("output_dir must be nonempty");
  c.scenario.validate();
  return c;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = snapshot();
  j["output_dir"] = output_dir.string();
  j["model"] = model.string();
  j["input_dir"] = input_dir.string();
  return j;
}

nlohmann::json RunConfig::snapshot() const {
  nlohmann::json ds{{"source", dataset.source}, {"path", dataset.path.string()},
                    {"column_map", dataset.column_map.to_json()}, {"resample", dataset.resample},
                    {"synth", dataset.synth.to_json()}};
  nlohmann::json sw{{"period_s", sweep.period_s}, {"replicate_invariant", sweep.replicate_invariant}};
  sw["kinds"] = nlohmann::json::array();
  for (auto k : sweep.kinds) sw["kinds"].push_back(perturb::to_string(k));
  sw["modes"] = nlohmann::json::array();
  for (auto m : sweep.modes) sw["modes"].push_back(features::to_string(m));
  sw["variants"] = nlohmann::json::array();
  for (auto v : sweep.variants) sw["variants"].push_back(magnet::to_string(v));
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : exclusions) ex.push_back({{"building", e.building}, {"trial_id", e.trial_id}});
  return {{"dataset", ds},
          {"building", building},
          {"mode", features::to_string(mode)},
          {"variant", magnet::to_string(variant)},
          {"padding", padding == numkit::Padding::Same ? "same" : "causal"},
          {"model_seed", model_seed},
          {"scenario", scenario.to_json()},
          {"split", split.to_json()},
          {"train", train.to_json()},
          {"eval", eval.to_json()},
          {"sigma_grid", sigma_grid},
          {"sweep", sw},
          {"sweep_seed", sweep_seed},
          {"seed", seed},
          {"exclusions", ex},
          {"gravity_alpha", gravity_alpha}};
}

void set_dotted(nlohmann::json& doc, const std::string& dotted, const std::string& value) {
  if (dotted.empty()) throw ConfigError("empty key in --set");
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(value);
  } catch (const nlohmann::json::exception&) {
    parsed = value;
  }
  nlohmann::json* node = &doc;
  std::size_t begin = 0;
  while (true) {
    const auto dot = dotted.find('.', begin);
    const std::string key = dotted.substr(begin, dot == std::string::npos ? std::string::npos : dot - begin);
    if (key.empty()) throw ConfigError("malformed key '" + dotted + "' in --set");
    if (!node->is_object()) throw ConfigError("cannot set '" + dotted + "': parent is not an object");
    if (dot == std::string::npos) {
      (*node)[key] = parsed;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = nlohmann::json::object();
    begin = dot + 1;
  }
}

}  // namespace magloc::cli
