#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"
#include "magloc/evalkit/metrics.hpp"
#include "magloc/features/windows.hpp"
#include "magloc/magnet/model.hpp"
#include "magloc/perturb/scenario.hpp"

namespace magloc::trainer {

/// Loss is MSE on standardized (x, y); every reported number is MAE in meters.
struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 200;
  std::size_t patience = 15;
  std::uint64_t seed = 0;
  std::size_t train_stride = 5;
  // Stop as soon as validation MAE reaches this value; 0 disables.
  double stop_at_val_mae = 0.0;
  evalkit::MaeKind mae = evalkit::MaeKind::Euclidean;

  void validate() const;  // throws ConfigError
  static TrainConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Tracks the best value of a minimized metric. Epochs are 1-based.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience);

  /// Records one epoch; returns true when `patience` epochs have passed
  /// without a strict improvement.
  bool update(std::size_t epoch, double value);
  bool improved() const noexcept { return improved_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_value() const noexcept { return best_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean MSE over the epoch's batches, standardized units
  double val_mae = 0.0;     // meters
  double best_val_mae = 0.0;

  nlohmann::json to_json() const;
  bool operator==(const EpochRecord&) const = default;
};

/// Everything here is a pure function of data, config and seeds; wall time is
/// reported separately so logs of repeated runs compare equal.
struct RunLog {
  nlohmann::json config;
  std::string dataset_digest;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mae = 0.0;
  std::string stop_reason;  // patience | max_epochs | target

  nlohmann::json summary_json() const;
  std::string epochs_jsonl() const;
  /// run_log.jsonl (one record per epoch) and run_summary.json.
  void write(const std::filesystem::path& dir) const;
  bool operator==(const RunLog&) const = default;
};

struct TrainResult {
  magnet::Model best;
  RunLog log;
  double wall_seconds = 0.0;
};

/// Hex digest over every trial's identity and samples.
std::string dataset_digest(std::span<const data::Trial> trials);

/// Throws ContractError if the two sets share a source trial.
void check_disjoint(const features::WindowSet& a, const features::WindowSet& b, const std::string& what);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Fits input statistics and target scaling on `train` only, then runs Adam
/// on shuffled mini-batches with early stopping on validation MAE. Windows
/// are passed unstandardized. The returned model is the best-validation one.
/// A non-finite loss throws NumericalError naming epoch, batch and
/// parameter norms.
TrainResult train(magnet::Model initial, const features::WindowSet& train, const features::WindowSet& val,
                  const TrainConfig& config, const nlohmann::json& config_snapshot = nlohmann::json::object(),
                  const std::string& digest = "", const EpochCallback& on_epoch = {});

/// One training run from trials: applies the scenario's training-side
/// perturbation (to train and validation trials alike; a one-time perturbed
/// recording), windows both splits at config.train_stride, builds the model
/// and trains it.
struct FitRequest {
  features::Mode mode = features::Mode::Raw3d;
  magnet::Variant variant = magnet::Variant::S;
  numkit::Padding padding = numkit::Padding::Same;
  std::uint64_t model_seed = 0;
  perturb::Scenario scenario;
  double gravity_alpha = features::kDefaultGravityAlpha;
};

struct FitResult {
  TrainResult run;
  std::vector<perturb::AuditRecord> audit;
  std::vector<std::string> warnings;
};

FitResult fit(const FitRequest& request, const std::vector<data::Trial>& train_trials,
              const std::vector<data::Trial>& val_trials, const TrainConfig& config,
              const nlohmann::json& config_snapshot = nlohmann::json::object(), const EpochCallback& on_epoch = {});

}  // namespace magloc::trainer
