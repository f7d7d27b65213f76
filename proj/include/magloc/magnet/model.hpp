#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "magloc/features/windows.hpp"
#include "magloc/magnet/config.hpp"
#include "magloc/magnet/network.hpp"
#include "magloc/numkit/checkpoint.hpp"

namespace magloc::magnet {

NetLayout layout_of(const MagNetConfig& config);

/// Per-axis affine map between network outputs and meters:
/// meters = output * std + mean. Identity until fitted on training targets.
struct TargetScaling {
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> std{1.0, 1.0};

  nlohmann::json to_json() const;
  static TargetScaling from_json(const nlohmann::json& j);
  bool operator==(const TargetScaling&) const = default;
};

class Model {
 public:
  /// Validates the config (structure and budget) and initializes He-uniform.
  static Model build(const MagNetConfig& config, std::uint64_t seed);

  const MagNetConfig& config() const noexcept { return config_; }
  ConvRegressor<float>& net() noexcept { return net_; }
  const ConvRegressor<float>& net() const noexcept { return net_; }

  std::optional<features::ChannelStats> stats;  // input standardization
  TargetScaling target_scaling;

  /// Standardized window [C x W] -> (x, y) meters.
  std::array<double, 2> forward(const numkit::Tensor<float>& window) const;
  /// Standardized batch [B x C x W] -> [B x 2] meters.
  numkit::Tensor<double> predict(const numkit::Tensor<float>& batch) const;

  std::vector<numkit::NamedTensor> named_parameters() const;
  std::size_t parameter_count() const { return net_.layout().parameter_count(); }
  std::string config_digest() const;

  /// `extra` is stored alongside config, stats and scaling (epoch, best
  /// validation MAE, seed, ...).
  numkit::Checkpoint to_checkpoint(const nlohmann::json& extra = nlohmann::json::object()) const;
  static Model from_checkpoint(const numkit::Checkpoint& checkpoint);
  void save(const std::filesystem::path& path, const nlohmann::json& extra = nlohmann::json::object()) const;
  static Model load(const std::filesystem::path& path, const std::optional<std::string>& expected_digest = {});

 private:
  MagNetConfig config_;
  ConvRegressor<float> net_;
};

}  // namespace magloc::magnet
