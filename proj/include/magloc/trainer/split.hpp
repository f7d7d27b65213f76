#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"

namespace magloc::trainer {

/// Whole trials go to one split. Overlapping windows from one walk would
/// leak between splits if windows were assigned individually.
struct SplitSpec {
  std::array<double, 3> ratios{0.7, 0.15, 0.15};  // train, val, test
  std::uint64_t seed = 0;
  // trial id -> "train" | "val" | "test"; when present, ratios are ignored
  std::optional<std::map<int, std::string>> assignment;

  void validate() const;  // throws ConfigError
  static SplitSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  bool operator==(const SplitSpec&) const = default;
};

struct TrialSplit {
  std::vector<int> train, val, test;  // trial ids, ascending

  nlohmann::json to_json() const;
};

/// Largest-remainder sizes for n items; leftover units go to the largest
/// fractional parts, ties to the earlier split.
std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios);

/// Seeded shuffle of the trial ids, then cumulative assignment by size.
/// Needs at least 3 trials; every split must receive one.
TrialSplit split(const std::vector<data::Trial>& trials, const SplitSpec& spec);

std::vector<data::Trial> select(const std::vector<data::Trial>& trials, const std::vector<int>& ids);

}  // namespace magloc::trainer
