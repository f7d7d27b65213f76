#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/numkit/ops.hpp"

namespace magloc::magnet {

enum class Variant { S, XL };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);  // throws ConfigError

inline constexpr std::size_t kLayerCount = 7;

struct MagNetConfig {
  Variant variant = Variant::S;
  std::size_t input_channels = 3;
  std::vector<std::size_t> kernels{5, 8, 10, 12, 15, 18, 20};
  std::vector<std::size_t> dilations{1, 2, 4, 8, 16, 32, 64};
  std::vector<std::size_t> channels{32, 32, 32, 32, 64, 64, 128};
  std::size_t hidden = 64;
  std::size_t outputs = 2;
  numkit::Padding padding = numkit::Padding::Same;

  static MagNetConfig defaults(Variant variant, std::size_t input_channels = 3);

  /// Every violated structural constraint, empty if none.
  std::vector<std::string> violations() const;
  /// Structural constraints plus the parameter budget band. Throws
  /// ConfigError listing each violation.
  void validate() const;

  nlohmann::json to_json() const;
  static MagNetConfig from_json(const nlohmann::json& j);
  bool operator==(const MagNetConfig&) const = default;
};

/// R = 1 + sum_i d_i (k_i - 1).
std::size_t receptive_field(const MagNetConfig& config);

struct BudgetBand {
  std::size_t lo;
  std::size_t hi;
};

/// S: 360k +- 20%, XL: 1M +- 25%.
BudgetBand budget_band(Variant variant);

/// Parameter count of the built model; throws ConfigError (with the count
/// and the band) if it falls outside the variant's band.
std::size_t validate_budget(const MagNetConfig& config);

}  // namespace magloc::magnet
