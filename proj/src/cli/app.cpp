#include "magloc/cli/app.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "magloc/cli/run_config.hpp"
#include "magloc/data/normalized.hpp"
#include "magloc/errors.hpp"
#include "magloc/evalkit/report.hpp"
#include "magloc/util/binary.hpp"
#include "magloc/util/text.hpp"

namespace magloc::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kTiming = "timing.json";

/// Tracks what a command writes so the manifest can list it with digests.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
  }

  const fs::path& dir() const { return dir_; }

  void text(const fs::path& rel, const std::string& content) {
    const auto path = dir_ / rel;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) throw IoError("cannot write " + path.string());
    files_.insert(rel.generic_string());
  }
  void json(const fs::path& rel, const nlohmann::json& j) { text(rel, j.dump(2) + "\n"); }
  void track(const fs::path& absolute) { files_.insert(fs::relative(absolute, dir_).generic_string()); }

  /// Merges this command's files into any manifest already in the directory.
  void write_manifest() {
    std::map<std::string, nlohmann::json> entries;
    const auto path = dir_ / kManifest;
    if (fs::exists(path)) {
      try {
        const auto old = nlohmann::json::parse(std::ifstream(path));
        for (const auto& e : old.at("files")) entries[e.at("path").get<std::string>()] = e;
      } catch (const nlohmann::json::exception&) {
        // unreadable manifest: rebuilt from this command's files
      }
    }
    for (const auto& rel : files_) {
      const auto bytes = util::read_file_bytes(dir_ / rel);
      nlohmann::json e{{"path", rel}, {"bytes", bytes.size()}};
      // Wall-clock timing differs run to run and is excluded from digests.
      if (rel == kTiming) {
        e["digest"] = nullptr;
        e["volatile"] = true;
      } else {
        e["digest"] = util::hex_digest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
      }
      entries[rel] = e;
    }
    nlohmann::json list = nlohmann::json::array();
    for (auto& [rel, e] : entries)
      if (fs::exists(dir_ / rel)) list.push_back(e);
    std::ofstream out(path);
    if (!out || !(out << nlohmann::json{{"files", list}}.dump(2) << "\n")) throw IoError("cannot write " + path.string());
  }

 private:
  fs::path dir_;
  std::set<std::string> files_;
};

struct Dataset {
  data::BuildingSet set;
  std::vector<std::string> warnings;
  std::vector<data::IngestDiagnostic> rejected;
};

Dataset load_dataset(const RunConfig& c) {
  Dataset d;
  const auto& ds = c.dataset;
  if (ds.source == "synth") {
    d.set = data::synth_generate(ds.synth);
  } else if (ds.source == "magpie") {
    fs::path root = ds.path;
    if (!fs::is_directory(root)) throw DataError("dataset path " + root.string() + " is not a directory");
    if (!c.building.empty() && fs::is_directory(root / c.building)) root /= c.building;
    data::IngestOptions o;
    o.columns = ds.column_map;
    o.building = c.building;
    o.resample = ds.resample;
    auto r = data::ingest_magpie(root, o);
    d.set = std::move(r.set);
    d.rejected = std::move(r.rejected);
    for (const auto& w : r.warnings) d.warnings.push_back(w.file + ": " + w.message);
    for (const auto& w : d.rejected) d.warnings.push_back("rejected " + w.file + ": " + w.message);
  } else {
    d.set = data::read_building_set(ds.path);
  }
  if (!c.building.empty() && d.set.building != c.building) {
    throw DataError("building '" + c.building + "' not in dataset (found '" + d.set.building + "')");
  }
  auto ex = data::exclude_trials(d.set, c.exclusions);
  d.set = std::move(ex.set);
  d.warnings.insert(d.warnings.end(), ex.warnings.begin(), ex.warnings.end());
  if (d.set.trials.empty()) throw DataError("no trials left in building " + d.set.building);
  return d;
}

nlohmann::json dataset_summary(const Dataset& d) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : d.set.trials) {
    trials.push_back({{"trial_id", t.trial_id},
                      {"records", t.records.size()},
                      {"sample_rate_hz", t.sample_rate_hz},
                      {"median_spacing_s", t.records.size() > 1 ? data::median_spacing(t) : 0.0},
                      {"duration_s", t.duration()},
                      {"rate_flagged", t.rate_flagged}});
  }
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : d.rejected) rejected.push_back({{"file", r.file}, {"message", r.message}});
  const auto& b = d.set.bbox;
  return {{"building", d.set.building},
          {"size_class", d.set.size_class},
          {"bbox", {b.min_x, b.min_y, b.max_x, b.max_y}},
          {"bbox_diagonal_m", b.diagonal()},
          {"trials", trials},
          {"rejected", rejected},
          {"warnings", d.warnings}};
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& out) {
  for (const auto& w : warnings) out << "warning: " << w << "\n";
}

struct Splits {
  trainer::TrialSplit ids;
  std::vector<data::Trial> train, val, test;
};

Splits make_splits(const RunConfig& c, const data::BuildingSet& set) {
  Splits s;
  s.ids = trainer::split(set.trials, c.split);
  s.train = trainer::select(set.trials, s.ids.train);
  s.val = trainer::select(set.trials, s.ids.val);
  s.test = trainer::select(set.trials, s.ids.test);
  return s;
}

nlohmann::json audit_json(const std::vector<perturb::AuditRecord>& audit) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : audit) j.push_back(a.to_json());
  return j;
}

void cmd_dataset(const RunConfig& c, Outputs& o, std::ostream& out, bool synth) {
  if (synth != (c.dataset.source == "synth")) {
    throw ConfigError(synth ? "synth needs dataset.source = synth" : "ingest needs dataset.source = magpie or normalized");
  }
  const auto d = load_dataset(c);
  data::write_building_set(d.set, o.dir() / "data");
  for (const auto& entry : fs::directory_iterator(o.dir() / "data")) o.track(entry.path());
  o.json(synth ? "synth_summary.json" : "ingest_summary.json", dataset_summary(d));
  print_warnings(d.warnings, out);
  out << (synth ? "synthesized " : "ingested ") << d.set.trials.size() << " trials of " << d.set.building << " into "
      << (o.dir() / "data").string() << "\n";
}

void cmd_train(const RunConfig& c, Outputs& o, std::ostream& out) {
  const auto d = load_dataset(c);
  print_warnings(d.warnings, out);
  const auto s = make_splits(c, d.set);
  o.json("split.json", s.ids.to_json());
  trainer::FitRequest req{c.mode, c.variant, c.padding, c.model_seed, c.scenario, c.gravity_alpha};
  const auto fit = trainer::fit(req, s.train, s.val, c.train, c.snapshot(), [&out](const trainer::EpochRecord& e) {
    out << "epoch " << e.epoch << " train_mse " << util::format_significant(e.train_loss, 6) << " val_mae_m "
        << util::format_significant(e.val_mae, 6) << "\n"
        << std::flush;
  });
  print_warnings(fit.warnings, out);
  const auto& log = fit.run.log;
  fit.run.best.save(o.dir() / "model.magn", {{"mode", features::to_string(c.mode)},
                                             {"best_epoch", log.best_epoch},
                                             {"best_val_mae_m", log.best_val_mae},
                                             {"dataset_digest", log.dataset_digest}});
  o.track(o.dir() / "model.magn");
  log.write(o.dir());
  o.track(o.dir() / "run_log.jsonl");
  o.track(o.dir() / "run_summary.json");
  if (!fit.audit.empty()) o.json("perturbation_audit_train.json", audit_json(fit.audit));
  o.json(kTiming, {{"command", "train"}, {"train_wall_seconds", fit.run.wall_seconds}});
  out << "best epoch " << log.best_epoch << " val_mae_m " << util::format_significant(log.best_val_mae, 6) << " ("
      << log.stop_reason << ")\n";
}

void cmd_eval(const RunConfig& c, Outputs& o, std::ostream& out) {
  const fs::path model_path = c.model.empty() ? o.dir() / "model.magn" : c.model;
  if (!fs::exists(model_path)) throw IoError("model checkpoint " + model_path.string() + " not found");
  const auto model = magnet::Model::load(model_path);
  const auto d = load_dataset(c);
  print_warnings(d.warnings, out);
  const auto s = make_splits(c, d.set);
  const auto report = evalkit::evaluate(model, c.mode, s.test, c.scenario, c.eval);
  print_warnings(report.warnings, out);
  o.json("eval_report.json", report.to_json());
  o.text("eval_report.csv", evalkit::EvalReport::csv_header() + "\n" + report.csv_row() + "\n");
  out << report.building << " " << features::to_string(report.mode) << " " << report.scenario.label() << ": MAE "
      << util::format_significant(report.mae_m, 6) << " m over " << report.window_count << " windows\n";
}

std::vector<evalkit::ThresholdResult> thresholds_of(const evalkit::SweepResult& s) {
  std::vector<evalkit::ThresholdResult> out;
  std::set<magnet::Variant> variants;
  for (const auto& series : s.series) variants.insert(series.variant);
  for (auto v : variants) {
    const auto n3 = evalkit::series_name(features::Mode::Raw3d, v), n2 = evalkit::series_name(features::Mode::Inv2d, v);
    bool has3 = false, has2 = false;
    for (const auto& series : s.series) {
      has3 |= series.name == n3;
      has2 |= series.name == n2;
    }
    if (has3 && has2) out.push_back(evalkit::find_threshold(s, n3, n2));
  }
  return out;
}

void emit_sweeps(const std::vector<evalkit::SweepResult>& sweeps, Outputs& o, std::ostream& out) {
  std::vector<evalkit::ThresholdResult> thresholds;
  for (const auto& s : sweeps) {
    const auto t = thresholds_of(s);
    thresholds.insert(thresholds.end(), t.begin(), t.end());
  }
  for (const auto& path : evalkit::emit_report(sweeps, thresholds, o.dir())) o.track(path);
  for (const auto& t : thresholds) out << t.describe() << "\n";
}

void cmd_sweep(const RunConfig& c, Outputs& o, std::ostream& out) {
  const auto d = load_dataset(c);
  print_warnings(d.warnings, out);
  const auto s = make_splits(c, d.set);
  o.json("split.json", s.ids.to_json());
  const auto started = std::chrono::steady_clock::now();

  std::map<std::string, magnet::Model> cache;
  auto provider = [&](features::Mode mode, magnet::Variant variant, const perturb::Scenario& scenario) {
    const std::string key = evalkit::series_name(mode, variant) + "|" + scenario.to_json().dump();
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    out << "training " << evalkit::series_name(mode, variant) << " under " << scenario.label() << "\n" << std::flush;
    trainer::FitRequest req{mode, variant, c.padding, c.model_seed, scenario, c.gravity_alpha};
    auto fit = trainer::fit(req, s.train, s.val, c.train, c.snapshot());
    return cache.emplace(key, std::move(fit.run.best)).first->second;
  };

  std::vector<evalkit::SweepResult> sweeps;
  for (auto kind : c.sweep.kinds) {
    evalkit::SweepSpec spec;
    spec.sigmas_deg = c.sigma_grid;
    spec.kind = kind;
    spec.modes = c.sweep.modes;
    spec.variants = c.sweep.variants;
    spec.period_s = c.sweep.period_s;
    spec.seed = c.sweep_seed;
    spec.replicate_invariant = c.sweep.replicate_invariant;
    spec.eval = c.eval;
    sweeps.push_back(evalkit::sweep(spec, s.test, provider));
    for (const auto& e : sweeps.back().errors) out << "warning: failed point " << e << "\n";
    // Per-sigma models are not reused across kinds; keep only baselines.
    std::erase_if(cache, [](const auto& kv) { return kv.first.find("\"kind\":\"None\"") == std::string::npos; });
  }
  nlohmann::json results{{"sweeps", nlohmann::json::array()}};
  for (const auto& sw : sweeps) results["sweeps"].push_back(sw.to_json());
  o.json("sweep_results.json", results);
  emit_sweeps(sweeps, o, out);
  o.json(kTiming, {{"command", "sweep"},
                   {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}});
}

void cmd_report(const RunConfig& c, Outputs& o, std::ostream& out) {
  const fs::path in = (c.input_dir.empty() ? o.dir() : c.input_dir) / "sweep_results.json";
  if (!fs::exists(in)) throw IoError("stored results " + in.string() + " not found");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(std::ifstream(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("cannot parse " + in.string() + ": " + e.what());
  }
  std::vector<evalkit::SweepResult> sweeps;
  for (const auto& s : j.at("sweeps")) sweeps.push_back(evalkit::SweepResult::from_json(s));
  if (sweeps.empty()) throw DataError(in.string() + " holds no sweeps");
  emit_sweeps(sweeps, o, out);
}

void cmd_inspect(const RunConfig& c, Outputs& o, std::ostream& out) {
  nlohmann::json report;
  if (c.dataset.source == "magpie") {
    fs::path root = c.dataset.path;
    if (!c.building.empty() && fs::is_directory(root / c.building)) root /= c.building;
    nlohmann::json schema = nlohmann::json::array();
    for (const auto& s : data::dump_schema(root, c.dataset.column_map)) {
      schema.push_back({{"file", s.file}, {"header", s.header}, {"missing", s.missing}, {"rows", s.rows}});
    }
    report["schema"] = schema;
  }
  report["dataset"] = dataset_summary(load_dataset(c));
  o.json("inspect.json", report);
  out << report.dump(2) << "\n";
}

std::string one_line(std::string s) {
  for (char& ch : s)
    if (ch == '\n' || ch == '\r') ch = ' ';
  return s;
}

int fail(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << "error: code=" << code << " kind=" << kind << " message=" << nlohmann::json(one_line(message)).dump() << "\n";
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"magloc: magnetic indoor localization experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string config_path, output, mode, variant, building, model, input;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "normalize a MagPie-style directory into trial CSVs"},
      {"synth", "generate a synthetic building"},
      {"train", "train a model; writes checkpoint and run log"},
      {"eval", "evaluate a checkpoint on the test split under the scenario"},
      {"sweep", "sigma sweeps, thresholds, CSV and SVG charts"},
      {"report", "regenerate CSV and SVG from stored sweep results"},
      {"inspect", "dataset and schema diagnostics"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "RunConfig JSON file");
    sub->add_option("--set", sets, "override a config key: dotted.key=value (JSON or plain string)");
    sub->add_option("-o,--output", output, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--mode", mode, "raw3d | inv2d");
    sub->add_option("--variant", variant, "S | XL");
    sub->add_option("--building", building, "building filter");
    if (name == "eval") sub->add_option("--model", model, "checkpoint path");
    if (name == "report") sub->add_option("--input", input, "directory holding sweep_results.json");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, kConfigError, "usage", e.what());
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json doc = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      set_dotted(doc, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!output.empty()) doc["output_dir"] = output;
    if (seed) doc["seed"] = *seed;
    if (!mode.empty()) doc["mode"] = mode;
    if (!variant.empty()) doc["variant"] = variant;
    if (!building.empty()) doc["building"] = building;
    if (!model.empty()) doc["model"] = model;
    if (!input.empty()) doc["input_dir"] = input;

    const RunConfig config = RunConfig::from_json(doc);
    const auto started = std::chrono::steady_clock::now();
    Outputs o(config.output_dir);
    o.json("run_config.json", config.to_json());
    if (command == "ingest") cmd_dataset(config, o, out, false);
    else if (command == "synth") cmd_dataset(config, o, out, true);
    else if (command == "train") cmd_train(config, o, out);
    else if (command == "eval") cmd_eval(config, o, out);
    else if (command == "sweep") cmd_sweep(config, o, out);
    else if (command == "report") cmd_report(config, o, out);
    else cmd_inspect(config, o, out);
    if (command != "train" && command != "sweep") {
      o.json(kTiming, {{"command", command},
                       {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}});
    }
    o.write_manifest();
    return kOk;
  } catch (const ConfigError& e) {
    return fail(err, kConfigError, "config", e.what());
  } catch (const ContractError& e) {
    return fail(err, kConfigError, "config", e.what());
  } catch (const NumericalError& e) {
    return fail(err, kNumericalError, "numerical", e.what());
  } catch (const DataError& e) {
    return fail(err, kDataError, "data", e.what());
  } catch (const IoError& e) {
    return fail(err, kDataError, "io", e.what());
  } catch (const ShapeError& e) {
    return fail(err, kConfigError, "config", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(err, kDataError, "data", e.what());
  } catch (const std::exception& e) {
    return fail(err, kDataError, "internal", e.what());
  }
}

}  // namespace magloc::cli
