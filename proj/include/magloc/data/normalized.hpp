#pragma once

#include <filesystem>
#include <iosfwd>

#include "magloc/data/trial.hpp"

namespace magloc::data {

inline constexpr const char* kNormalizedHeader =
    "t,mag_x,mag_y,mag_z,acc_x,acc_y,acc_z,pos_x,pos_y,pos_z";

/// Fixed-header CSV, full round-trip precision.
void write_trial_csv(const Trial& trial, std::ostream& out);

std::string trial_file_name(const Trial& trial);

/// Writes one CSV per trial plus building.json describing the set.
void write_building_set(const BuildingSet& set, const std::filesystem::path& dir);
BuildingSet read_building_set(const std::filesystem::path& dir);

}  // namespace magloc::data
