#include "magloc/data/normalized.hpp"

#include <fstream>
#include <ostream>

#include <json.hpp>

#include "magloc/data/ingest.hpp"
#include "magloc/errors.hpp"
#include "magloc/util/text.hpp"

namespace magloc::data {

void write_trial_csv(const Trial& trial, std::ostream& out) {
  out << kNormalizedHeader << '\n';
  for (const auto& r : trial.records) {
    const double v[10] = {r.t,     r.mag.x, r.mag.y, r.mag.z, r.acc.x,
                          r.acc.y, r.acc.z, r.pos.x, r.pos.y, r.pos.z};
    for (int c = 0; c < 10; ++c) {
      if (c) out << ',';
      out << util::format_exact(v[c]);
    }
    out << '\n';
  }
}

std::string trial_file_name(const Trial& trial) {
  return trial.building + "_trial" + std::to_string(trial.trial_id) + ".csv";
}

void write_building_set(const BuildingSet& set, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta;
  meta["building"] = set.building;
  meta["size_class"] = set.size_class;
  meta["bbox"] = {set.bbox.min_x, set.bbox.min_y, set.bbox.max_x, set.bbox.max_y};
  meta["trials"] = nlohmann::json::array();
  for (const auto& trial : set.trials) {
    const auto name = trial_file_name(trial);
    std::ofstream out(dir / name);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    write_trial_csv(trial, out);
    meta["trials"].push_back({{"file", name},
                              {"trial_id", trial.trial_id},
                              {"device", trial.device},
                              {"sample_rate_hz", trial.sample_rate_hz},
                              {"records", trial.records.size()},
                              {"rate_flagged", trial.rate_flagged}});
  }
  std::ofstream out(dir / "building.json");
  if (!out) throw IoError("cannot write " + (dir / "building.json").string());
  out << meta.dump(2) << '\n';
}

BuildingSet read_building_set(const std::filesystem::path& dir) {
  std::ifstream in(dir / "building.json");
  if (!in) throw DataError("missing building.json in " + dir.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("building.json: " + std::string(e.what()));
  }
  BuildingSet set;
  try {
    set.building = meta.at("building").get<std::string>();
    set.size_class = meta.at("size_class").get<std::string>();
    const auto& b = meta.at("bbox");
    set.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
    for (const auto& entry : meta.at("trials")) {
      Trial trial = read_trial_file(dir / entry.at("file").get<std::string>(), ColumnMap{});
      trial.building = set.building;
      trial.trial_id = entry.at("trial_id").get<int>();
      trial.device = entry.at("device").get<std::string>();
      trial.sample_rate_hz = entry.at("sample_rate_hz").get<double>();
      trial.rate_flagged = entry.at("rate_flagged").get<bool>();
      set.trials.push_back(std::move(trial));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("building.json: " + std::string(e.what()));
  }
  return set;
}

}  // namespace magloc::data
