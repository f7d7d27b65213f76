#include "magloc/trainer/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "magloc/errors.hpp"
#include "magloc/numkit/random.hpp"

namespace magloc::trainer {

namespace {

const char* const kSplitNames[3] = {"train", "val", "test"};

std::string ratios_text(const std::array<double, 3>& r) {
  return "(" + std::to_string(r[0]) + ", " + std::to_string(r[1]) + ", " + std::to_string(r[2]) + ")";
}

}  // namespace

void SplitSpec::validate() const {
  std::vector<std::string> problems;
  if (!assignment) {
    double sum = 0.0;
    for (double r : ratios) {
      if (!(r >= 0.0)) problems.push_back("split ratios must be non-negative");
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) problems.push_back("split ratios must sum to 1, got " + std::to_string(sum));
  } else {
    for (const auto& [id, name] : *assignment) {
      if (name != "train" && name != "val" && name != "test") {
        problems.push_back("trial " + std::to_string(id) + " assigned to unknown split '" + name + "'");
      }
    }
  }
  if (problems.empty()) return;
  std::string msg = "invalid split spec: " + problems.front();
  for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
  throw ConfigError(msg);
}

SplitSpec SplitSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("split must be a JSON object");
  SplitSpec s;
  for (const auto& [key, value] : j.items()) {
    if (key == "ratios") {
      if (!value.is_array() || value.size() != 3) throw ConfigError("split.ratios must be [train, val, test]");
      for (std::size_t i = 0; i < 3; ++i) s.ratios[i] = value[i].get<double>();
    } else if (key == "seed") {
      s.seed = value.get<std::uint64_t>();
    } else if (key == "assignment") {
      if (value.is_null()) continue;
      std::map<int, std::string> a;
      for (const auto& [name, ids] : value.items()) {
        for (const auto& id : ids) {
          if (!a.emplace(id.get<int>(), name).second) {
            throw ConfigError("trial " + std::to_string(id.get<int>()) + " assigned to more than one split");
          }
        }
      }
      s.assignment = std::move(a);
    } else {
      throw ConfigError("unknown key 'split." + key + "'");
    }
  }
  s.validate();
  return s;
}

nlohmann::json SplitSpec::to_json() const {
  nlohmann::json j{{"ratios", ratios}, {"seed", seed}};
  if (assignment) {
    nlohmann::json a = nlohmann::json::object();
    for (const auto& [id, name] : *assignment) a[name].push_back(id);
    j["assignment"] = a;
  }
  return j;
}

nlohmann::json TrialSplit::to_json() const { return {{"train", train}, {"val", val}, {"test", test}}; }

std::array<std::size_t, 3> split_sizes(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    used += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; used < n; ++k, ++used) ++sizes[order[k % 3]];
  return sizes;
}

TrialSplit split(const std::vector<data::Trial>& trials, const SplitSpec& spec) {
  spec.validate();
  if (trials.size() < 3) {
    throw DataError("need >= 3 trials to split into train/val/test, got " + std::to_string(trials.size()));
  }
  std::vector<int> ids;
  for (const auto& t : trials) ids.push_back(t.trial_id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw DataError("duplicate trial ids in split input");

  std::array<std::vector<int>, 3> parts;
  if (spec.assignment) {
    const auto& a = *spec.assignment;
    for (int id : ids) {
      const auto it = a.find(id);
      if (it == a.end()) throw ConfigError("split assignment does not list trial " + std::to_string(id));
      const auto k = std::find(std::begin(kSplitNames), std::end(kSplitNames), it->second) - std::begin(kSplitNames);
      parts[k].push_back(id);
    }
    for (const auto& [id, name] : a) {
      if (!std::binary_search(ids.begin(), ids.end(), id)) {
        throw ConfigError("split assignment names trial " + std::to_string(id) + ", which is not in the set");
      }
    }
  } else {
    numkit::Rng rng(spec.seed);
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    const auto sizes = split_sizes(ids.size(), spec.ratios);
    std::size_t at = 0;
    for (std::size_t k = 0; k < 3; ++k)
      for (std::size_t i = 0; i < sizes[k]; ++i) parts[k].push_back(ids[at++]);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (parts[k].empty()) {
      throw ConfigError(std::string("split '") + kSplitNames[k] + "' received zero of " + std::to_string(ids.size()) +
                        " trials with ratios " + ratios_text(spec.ratios) + "; adjust the ratios or the assignment");
    }
    std::sort(parts[k].begin(), parts[k].end());
  }
  return {parts[0], parts[1], parts[2]};
}

std::vector<data::Trial> select(const std::vector<data::Trial>& trials, const std::vector<int>& ids) {
  std::vector<data::Trial> out;
  for (int id : ids) {
    const auto it = std::find_if(trials.begin(), trials.end(), [id](const data::Trial& t) { return t.trial_id == id; });
    if (it == trials.end()) throw DataError("trial " + std::to_string(id) + " not found");
    out.push_back(*it);
  }
  return out;
}

}  // namespace magloc::trainer
