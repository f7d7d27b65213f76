#include "magloc/data/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>

#include "magloc/data/resample.hpp"
#include "magloc/errors.hpp"
#include "magloc/util/text.hpp"

namespace magloc::data {

namespace {

// value * mul / div, with one side always 1 so the conversion is a single
// correctly rounded operation ("60" ms becomes exactly the double 0.06).
struct Scale {
  double mul = 1.0;
  double div = 1.0;
  double operator()(double v) const { return v * mul / div; }
  Vec3 operator()(const Vec3& v) const { return {(*this)(v.x), (*this)(v.y), (*this)(v.z)}; }
};

Scale time_scale(const std::string& unit) {
  if (unit == "s") return {};
  if (unit == "ms") return {1.0, 1e3};
  if (unit == "us") return {1.0, 1e6};
  if (unit == "ns") return {1.0, 1e9};
  throw ConfigError("unknown time unit '" + unit + "'");
}

Scale mag_scale(const std::string& unit) {
  if (unit == "uT") return {};
  if (unit == "nT") return {1.0, 1e3};
  if (unit == "mT") return {1e3, 1.0};
  if (unit == "G") return {1e2, 1.0};
  throw ConfigError("unknown magnetometer unit '" + unit + "'");
}

Scale acc_scale(const std::string& unit) {
  if (unit == "m/s2") return {};
  if (unit == "g") return {9.80665, 1.0};
  throw ConfigError("unknown accelerometer unit '" + unit + "'");
}

Scale pos_scale(const std::string& unit) {
  if (unit == "m") return {};
  if (unit == "cm") return {1.0, 1e2};
  if (unit == "mm") return {1.0, 1e3};
  throw ConfigError("unknown position unit '" + unit + "'");
}

template <typename Map>
auto mapped_columns(Map& m) {
  using Field = decltype(&m.t);
  return std::vector<std::pair<const char*, Field>>{{"t", &m.t},         {"mag_x", &m.mag_x}, {"mag_y", &m.mag_y}, {"mag_z", &m.mag_z},
          {"acc_x", &m.acc_x}, {"acc_y", &m.acc_y}, {"acc_z", &m.acc_z}, {"pos_x", &m.pos_x},
          {"pos_y", &m.pos_y}, {"pos_z", &m.pos_z}};
}

std::vector<std::filesystem::path> trial_files(const std::filesystem::path& root,
                                               const std::string& extension) {
  if (!std::filesystem::is_directory(root)) throw DataError("not a directory: " + root.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == extension) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int trial_id_from_stem(const std::string& stem, int fallback) {
  static const std::regex trailing_digits("(\\d+)$");
  std::smatch m;
  if (std::regex_search(stem, m, trailing_digits)) return std::stoi(m[1].str());
  return fallback;
}

}  // namespace

ColumnMap ColumnMap::from_json(const nlohmann::json& j) {
  ColumnMap m;
  static const char* known[] = {"delimiter", "t",     "mag_x", "mag_y",     "mag_z",
                                "acc_x",     "acc_y", "acc_z", "pos_x",     "pos_y",
                                "pos_z",     "time_unit", "mag_unit", "acc_unit", "pos_unit"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("column_map: unknown key '" + key + "'");
    }
  }
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1 && d != "\\t") throw ConfigError("column_map: delimiter must be one character");
    m.delimiter = d == "\\t" ? '\t' : d[0];
  }
  for (auto& [name, field] : mapped_columns(m)) {
    if (j.contains(name)) *field = j.at(name).get<std::string>();
  }
  if (j.contains("time_unit")) m.time_unit = j.at("time_unit").get<std::string>();
  if (j.contains("mag_unit")) m.mag_unit = j.at("mag_unit").get<std::string>();
  if (j.contains("acc_unit")) m.acc_unit = j.at("acc_unit").get<std::string>();
  if (j.contains("pos_unit")) m.pos_unit = j.at("pos_unit").get<std::string>();
  time_scale(m.time_unit);
  mag_scale(m.mag_unit);
  acc_scale(m.acc_unit);
  pos_scale(m.pos_unit);
  return m;
}

nlohmann::json ColumnMap::to_json() const {
  nlohmann::json j;
  j["delimiter"] = delimiter == '\t' ? std::string("\\t") : std::string(1, delimiter);
  for (const auto& [name, field] : mapped_columns(*this)) j[name] = *field;
  j["time_unit"] = time_unit;
  j["mag_unit"] = mag_unit;
  j["acc_unit"] = acc_unit;
  j["pos_unit"] = pos_unit;
  return j;
}

Trial read_trial_file(const std::filesystem::path& file, const ColumnMap& columns) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(file.string() + ": empty file");
  const auto header = util::split(line, columns.delimiter);

  std::vector<std::size_t> index;
  for (const auto& [field, name] : mapped_columns(columns)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) {
      throw DataError(file.string() + ": missing column '" + *name + "' (mapped to " + field + ")");
    }
    index.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  const Scale ts = time_scale(columns.time_unit);
  const Scale ms = mag_scale(columns.mag_unit);
  const Scale as = acc_scale(columns.acc_unit);
  const Scale ps = pos_scale(columns.pos_unit);

  Trial trial;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (util::trim(line).empty()) continue;
    const auto cells = util::split(line, columns.delimiter);
    double v[10];
    for (std::size_t c = 0; c < 10; ++c) {
      if (index[c] >= cells.size() || !util::parse_double(cells[index[c]], v[c]) || !std::isfinite(v[c])) {
        throw DataError(file.string() + ":" + std::to_string(row) + ": bad value in column '" +
                        header[index[c]] + "'");
      }
    }
    SampleRecord r;
    r.t = ts(v[0]);
    r.mag = ms(Vec3{v[1], v[2], v[3]});
    r.acc = as(Vec3{v[4], v[5], v[6]});
    r.pos = ps(Vec3{v[7], v[8], v[9]});
    trial.records.push_back(r);
  }
  std::stable_sort(trial.records.begin(), trial.records.end(),
                   [](const SampleRecord& a, const SampleRecord& b) { return a.t < b.t; });
  return trial;
}

IngestResult ingest_magpie(const std::filesystem::path& root, const IngestOptions& options) {
  IngestResult result;
  result.set.building = options.building.empty() ? root.filename().string() : options.building;
  result.set.size_class = size_class_of(result.set.building);
  const auto files = trial_files(root, options.file_extension);
  for (std::size_t n = 0; n < files.size(); ++n) {
    const auto& file = files[n];
    Trial trial = read_trial_file(file, options.columns);
    trial.building = result.set.building;
    trial.trial_id = trial_id_from_stem(file.stem().string(), static_cast<int>(n + 1));
    const auto& recs = trial.records;
    const auto dup = std::adjacent_find(recs.begin(), recs.end(), [](const SampleRecord& a, const SampleRecord& b) {
      return !(a.t < b.t);
    });
    if (dup != recs.end()) {
      result.rejected.push_back({file.string(), "non-monotone timestamps at t=" +
                                                    util::format_exact(dup->t) + " (duplicate after sort)"});
      continue;
    }
    if (recs.size() < 2) {
      result.rejected.push_back({file.string(), "fewer than 2 records"});
      continue;
    }
    if (options.resample) {
      trial = resample_align(trial, options.target_rate_hz);
      if (trial.rate_flagged) {
        result.warnings.push_back({file.string(), "sample rate deviates more than 5% after resampling"});
      }
    } else {
      const double spacing = median_spacing(trial);
      trial.sample_rate_hz = 1.0 / spacing;
      trial.rate_flagged = std::abs(spacing * options.target_rate_hz - 1.0) > 0.05;
      if (trial.rate_flagged) {
        result.warnings.push_back({file.string(), "sample rate " + util::format_significant(trial.sample_rate_hz, 6) +
                                                      " Hz deviates more than 5% from the target"});
      }
    }
    result.set.trials.push_back(std::move(trial));
  }
  std::sort(result.set.trials.begin(), result.set.trials.end(),
            [](const Trial& a, const Trial& b) { return a.trial_id < b.trial_id; });
  result.set.bbox = bounding_box_of(result.set.trials);
  return result;
}

std::vector<SchemaReport> dump_schema(const std::filesystem::path& root, const ColumnMap& columns,
                                      const std::string& extension) {
  std::vector<SchemaReport> reports;
  for (const auto& file : trial_files(root, extension)) {
    SchemaReport r;
    r.file = file.filename().string();
    std::ifstream in(file);
    std::string line;
    if (std::getline(in, line)) r.header = util::split(line, columns.delimiter);
    for (const auto& [field, name] : mapped_columns(columns)) {
      if (std::find(r.header.begin(), r.header.end(), *name) == r.header.end()) r.missing.push_back(*name);
    }
    while (std::getline(in, line)) {
      if (!util::trim(line).empty()) ++r.rows;
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

std::vector<TrialKey> default_exclusions() {
  return {{"Loomis", 8}, {"Loomis", 9}, {"Loomis", 10}, {"Loomis", 11}};
}

ExclusionResult exclude_trials(const BuildingSet& set, const std::vector<TrialKey>& exclusions) {
  ExclusionResult result{set, {}};
  auto& trials = result.set.trials;
  for (const auto& key : exclusions) {
    if (key.building != set.building) continue;
    const auto it = std::find_if(trials.begin(), trials.end(),
                                 [&](const Trial& t) { return t.trial_id == key.trial_id; });
    if (it == trials.end()) {
      result.warnings.push_back("exclusion " + key.building + "/" + std::to_string(key.trial_id) +
                                " matches no trial");
      continue;
    }
    trials.erase(it);
  }
  if (trials.empty() && !set.trials.empty()) {
    result.warnings.push_back("all trials of " + set.building + " were excluded");
  }
  // Synthetic sets keep their configured footprint.
  if (trials.size() != set.trials.size() && set.size_class != "synthetic") result.set.bbox = bounding_box_of(trials);
  return result;
}

}  // namespace magloc::data
