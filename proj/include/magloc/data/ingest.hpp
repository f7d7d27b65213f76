#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"

namespace magloc::data {

/// Maps source columns onto the normalized fields and declares their units.
/// The defaults match the normalized CSV header, so normalized output can be
/// re-ingested with a default map.
struct ColumnMap {
  char delimiter = ',';
  std::string t = "t";
  std::string mag_x = "mag_x", mag_y = "mag_y", mag_z = "mag_z";
  std::string acc_x = "acc_x", acc_y = "acc_y", acc_z = "acc_z";
  std::string pos_x = "pos_x", pos_y = "pos_y", pos_z = "pos_z";
  std::string time_unit = "s";   // s | ms | us | ns
  std::string mag_unit = "uT";   // uT | nT | mT | G
  std::string acc_unit = "m/s2"; // m/s2 | g
  std::string pos_unit = "m";    // m | cm | mm

  static ColumnMap from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct IngestOptions {
  ColumnMap columns;
  std::string building;            // empty: directory name
  std::string file_extension = ".csv";
  bool resample = true;
  double target_rate_hz = kTargetRateHz;
};

struct IngestDiagnostic {
  std::string file;
  std::string message;
};

struct IngestResult {
  BuildingSet set;
  std::vector<IngestDiagnostic> rejected;  // trials dropped with a reason
  std::vector<IngestDiagnostic> warnings;
};

/// One trial per delimited text file in `root` (sorted by filename). The
/// trial id is the trailing integer of the file stem, else the file's index.
IngestResult ingest_magpie(const std::filesystem::path& root, const IngestOptions& options);

/// Parses a single trial file. Throws DataError naming any missing column.
Trial read_trial_file(const std::filesystem::path& file, const ColumnMap& columns);

struct SchemaReport {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::string> missing;  // mapped columns absent from the header
  std::size_t rows = 0;
};

/// Header/column-presence diagnostic for every file under `root`.
std::vector<SchemaReport> dump_schema(const std::filesystem::path& root, const ColumnMap& columns,
                                      const std::string& extension = ".csv");

struct TrialKey {
  std::string building;
  int trial_id = 0;

  bool operator==(const TrialKey&) const = default;
  auto operator<=>(const TrialKey&) const = default;
};

/// Loomis trials 8 to 11 have time-sync problems in the public recordings.
std::vector<TrialKey> default_exclusions();

struct ExclusionResult {
  BuildingSet set;
  std::vector<std::string> warnings;
};

ExclusionResult exclude_trials(const BuildingSet& set, const std::vector<TrialKey>& exclusions);

}  // namespace magloc::data
