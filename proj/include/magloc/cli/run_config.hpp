#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/ingest.hpp"
#include "magloc/data/synth.hpp"
#include "magloc/evalkit/evaluate.hpp"
#include "magloc/magnet/config.hpp"
#include "magloc/perturb/scenario.hpp"
#include "magloc/trainer/split.hpp"
#include "magloc/trainer/trainer.hpp"

namespace magloc::cli {

struct DatasetConfig {
  std::string source = "synth";  // synth | magpie | normalized
  std::filesystem::path path;    // magpie root or normalized building dir
  data::ColumnMap column_map;
  bool resample = true;
  data::SynthConfig synth;
};

struct SweepConfig {
  std::vector<perturb::Kind> kinds{perturb::Kind::RandomTest, perturb::Kind::RandomBoth};
  std::vector<features::Mode> modes{features::Mode::Raw3d, features::Mode::Inv2d};
  std::vector<magnet::Variant> variants{magnet::Variant::S};
  double period_s = 1.0;
  bool replicate_invariant = false;
};

/// The resolved document every subcommand runs from. Seeds not given
/// explicitly are derived from the master seed, so the frozen copy
/// (to_json) pins every one of them.
struct RunConfig {
  DatasetConfig dataset;
  std::string building;  // filter; empty accepts the dataset's only building
  features::Mode mode = features::Mode::Raw3d;
  magnet::Variant variant = magnet::Variant::S;
  numkit::Padding padding = numkit::Padding::Same;
  std::uint64_t model_seed = 0;
  perturb::Scenario scenario;
  trainer::SplitSpec split;
  trainer::TrainConfig train;
  evalkit::EvalOptions eval;
  std::vector<double> sigma_grid;
  SweepConfig sweep;
  std::uint64_t sweep_seed = 0;
  std::filesystem::path output_dir = "magloc_out";
  std::filesystem::path model;      // checkpoint for eval; empty: output_dir/model.magn
  std::filesystem::path input_dir;  // stored results for report
  std::uint64_t seed = 0;
  std::vector<data::TrialKey> exclusions = data::default_exclusions();
  double gravity_alpha = features::kDefaultGravityAlpha;

  /// Throws ConfigError on unknown keys, wrong types or invalid values.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// to_json without output-location keys: what determines the numbers.
  nlohmann::json snapshot() const;
};

/// Sets a dotted key ("train.batch_size") to a value given as JSON text,
/// falling back to a plain string when the text is not JSON.
void set_dotted(nlohmann::json& doc, const std::string& dotted, const std::string& value);

}  // namespace magloc::cli
