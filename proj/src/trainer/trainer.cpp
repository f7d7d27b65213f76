#include "magloc/trainer/trainer.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "magloc/errors.hpp"
#include "magloc/evalkit/predict.hpp"
#include "magloc/numkit/adam.hpp"
#include "magloc/numkit/random.hpp"
#include "magloc/util/text.hpp"

namespace magloc::trainer {

using numkit::Shape;
using numkit::Tensor;

void TrainConfig::validate() const {
  std::vector<std::string> problems;
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) problems.push_back("learning_rate must be > 0");
  if (batch_size < 1) problems.push_back("batch_size must be >= 1");
  if (max_epochs < 1) problems.push_back("max_epochs must be >= 1");
  if (patience < 1) problems.push_back("patience must be >= 1");
  if (train_stride < 1) problems.push_back("train_stride must be >= 1");
  if (!(stop_at_val_mae >= 0.0)) problems.push_back("stop_at_val_mae must be >= 0");
  if (problems.empty()) return;
  std::string msg = "invalid train config: " + problems.front();
  for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
  throw ConfigError(msg);
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("train must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "max_epochs") c.max_epochs = value.get<std::size_t>();
      else if (key == "patience") c.patience = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "train_stride") c.train_stride = value.get<std::size_t>();
      else if (key == "stop_at_val_mae") c.stop_at_val_mae = value.get<double>();
      else if (key == "mae") c.mae = evalkit::mae_kind_from_string(value.get<std::string>());
      else throw ConfigError("unknown key 'train." + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"batch_size", batch_size}, {"max_epochs", max_epochs},
          {"patience", patience},           {"seed", seed},             {"train_stride", train_stride},
          {"stop_at_val_mae", stop_at_val_mae}, {"mae", evalkit::to_string(mae)}};
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
  require(patience >= 1, "early stopping patience must be >= 1");
}

bool EarlyStopper::update(std::size_t epoch, double value) {
  improved_ = value < best_;
  if (improved_) {
    best_ = value;
    best_epoch_ = epoch;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

nlohmann::json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"train_loss_mse", train_loss}, {"val_mae_m", val_mae}, {"best_val_mae_m", best_val_mae}};
}

nlohmann::json RunLog::summary_json() const {
  return {{"config", config},
          {"dataset_digest", dataset_digest},
          {"epochs_run", epochs.size()},
          {"best_epoch", best_epoch},
          {"best_val_mae_m", best_val_mae},
          {"stop_reason", stop_reason},
          {"loss", "mse on standardized targets"},
          {"metric", "mae in meters"}};
}

std::string RunLog::epochs_jsonl() const {
  std::string out;
  for (const auto& e : epochs) out += e.to_json().dump() + "\n";
  return out;
}

void RunLog::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream lines(dir / "run_log.jsonl");
  std::ofstream summary(dir / "run_summary.json");
  if (!lines || !summary) throw IoError("cannot write run log into " + dir.string());
  lines << epochs_jsonl();
  summary << summary_json().dump(2) << "\n";
}

std::string dataset_digest(std::span<const data::Trial> trials) {
  std::uint64_t h = numkit::fnv1a64("magloc-dataset");
  auto add = [&h](const auto& v) {
    h = numkit::fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
  };
  for (const auto& t : trials) {
    h = numkit::fnv1a64(t.building + "/" + std::to_string(t.trial_id) + "/" + t.device, h);
    for (const auto& r : t.records) {
      for (double d : {r.t, r.mag.x, r.mag.y, r.mag.z, r.acc.x, r.acc.y, r.acc.z, r.pos.x, r.pos.y, r.pos.z})
        add(std::bit_cast<std::uint64_t>(d));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void check_disjoint(const features::WindowSet& a, const features::WindowSet& b, const std::string& what) {
  std::set<std::pair<std::string, int>> seen;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto m = a.meta(i);
    seen.emplace(m.building, m.trial_id);
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto m = b.meta(i);
    if (seen.count({m.building, m.trial_id})) {
      throw ContractError("leakage: trial " + m.building + "/" + std::to_string(m.trial_id) + " appears in both " +
                          what);
    }
  }
}

namespace {

magnet::TargetScaling fit_targets(const features::WindowSet& train) {
  magnet::TargetScaling s;
  const double n = static_cast<double>(train.size());
  for (std::size_t a = 0; a < 2; ++a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) sum += train.target(i)[a];
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double d = train.target(i)[a] - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) throw DataError(std::string("zero variance in training target ") + (a == 0 ? "x" : "y"));
    s.mean[a] = mean;
    s.std[a] = sd;
  }
  return s;
}

std::string norms_text(const magnet::Model& model) {
  std::ostringstream out;
  const auto params = model.named_parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    double ss = 0.0;
    for (float v : params[i].value.values()) ss += double(v) * double(v);
    out << (i ? ", " : "") << params[i].name << "=" << util::format_significant(std::sqrt(ss), 6);
  }
  return out.str();
}

}  // namespace

TrainResult train(magnet::Model initial, const features::WindowSet& train_raw, const features::WindowSet& val_raw,
                  const TrainConfig& config, const nlohmann::json& config_snapshot, const std::string& digest,
                  const EpochCallback& on_epoch) {
  config.validate();
  const auto started = std::chrono::steady_clock::now();
  if (train_raw.empty()) throw DataError("no training windows");
  if (val_raw.empty()) throw DataError("no validation windows");
  if (train_raw.mode() != val_raw.mode()) throw ContractError("train and validation windows use different modes");
  if (train_raw.channels() != initial.config().input_channels) {
    throw ConfigError("model expects " + std::to_string(initial.config().input_channels) +
                      " input channels but " + features::to_string(train_raw.mode()) + " windows have " +
                      std::to_string(train_raw.channels()));
  }
  check_disjoint(train_raw, val_raw, "train and validation");

  magnet::Model model = std::move(initial);
  model.stats = features::ChannelStats::fit(train_raw);
  model.target_scaling = fit_targets(train_raw);
  features::WindowSet tr = train_raw;
  features::WindowSet va = val_raw;
  features::standardize(tr, *model.stats);
  features::standardize(va, *model.stats);
  const auto val_truth = evalkit::targets_of(va);

  std::vector<float> targets(2 * tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i)
    for (std::size_t a = 0; a < 2; ++a)
      targets[2 * i + a] =
          static_cast<float>((tr.target(i)[a] - model.target_scaling.mean[a]) / model.target_scaling.std[a]);

  auto& params = model.net().parameters();
  auto state = numkit::AdamState<float>::zeros_like(params, {config.learning_rate});
  EarlyStopper stopper(config.patience);
  TrainResult result{model, {}, 0.0};
  result.log.config = config_snapshot;
  result.log.dataset_digest = digest;
  result.log.stop_reason = "max_epochs";

  std::vector<std::size_t> order(tr.size());
  std::vector<std::size_t> idx;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    numkit::Rng rng(numkit::derive_seed(config.seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size, ++batch_no) {
      const std::size_t n = std::min(config.batch_size, order.size() - begin);
      idx.assign(order.begin() + begin, order.begin() + begin + n);
      Tensor<float> y(Shape{n, 2});
      for (std::size_t b = 0; b < n; ++b) {
        y.values()[2 * b] = targets[2 * idx[b]];
        y.values()[2 * b + 1] = targets[2 * idx[b] + 1];
      }
      const auto lg = model.net().loss_and_gradients(tr.gather(idx), y);
      if (!std::isfinite(lg.loss)) {
        throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(batch_no) + "; parameter norms: " + norms_text(model));
      }
      numkit::adam_step<float>(params, lg.gradients, state);
      loss_sum += static_cast<double>(lg.loss) * static_cast<double>(n);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_mae = evalkit::mae(evalkit::predict_windows(model, va), val_truth, config.mae);
    if (!std::isfinite(rec.val_mae)) {
      throw NumericalError("non-finite validation MAE at epoch " + std::to_string(epoch) +
                           "; parameter norms: " + norms_text(model));
    }
    const bool stop = stopper.update(epoch, rec.val_mae);
    if (stopper.improved()) result.best = model;
    rec.best_val_mae = stopper.best_value();
    result.log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (config.stop_at_val_mae > 0.0 && rec.val_mae <= config.stop_at_val_mae) {
      result.log.stop_reason = "target";
      break;
    }
    if (stop) {
      result.log.stop_reason = "patience";
      break;
    }
  }
  result.log.best_epoch = stopper.best_epoch();
  result.log.best_val_mae = stopper.best_value();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

FitResult fit(const FitRequest& request, const std::vector<data::Trial>& train_trials,
              const std::vector<data::Trial>& val_trials, const TrainConfig& config,
              const nlohmann::json& config_snapshot, const EpochCallback& on_epoch) {
  config.validate();
  request.scenario.validate();
  FitResult out;
  std::vector<data::Trial> fit_trials = train_trials;
  fit_trials.insert(fit_trials.end(), val_trials.begin(), val_trials.end());
  if (request.scenario.perturbs_train()) {
    auto p = perturb::apply_scenario(fit_trials, {}, request.scenario);
    fit_trials = std::move(p.train);
    out.audit = std::move(p.audit);
    out.warnings.insert(out.warnings.end(), p.warnings.begin(), p.warnings.end());
  }
  const std::vector<data::Trial> tr(fit_trials.begin(), fit_trials.begin() + train_trials.size());
  const std::vector<data::Trial> va(fit_trials.begin() + train_trials.size(), fit_trials.end());

  features::WindowOptions o;
  o.mode = request.mode;
  o.stride = config.train_stride;
  o.gravity_alpha = request.gravity_alpha;
  auto wt = features::make_windows(tr, o);
  auto wv = features::make_windows(va, o);
  out.warnings.insert(out.warnings.end(), wt.warnings.begin(), wt.warnings.end());
  out.warnings.insert(out.warnings.end(), wv.warnings.begin(), wv.warnings.end());

  auto mc = magnet::MagNetConfig::defaults(request.variant, features::channel_count(request.mode));
  mc.padding = request.padding;
  auto model = magnet::Model::build(mc, request.model_seed);
  std::vector<data::Trial> all = train_trials;
  all.insert(all.end(), val_trials.begin(), val_trials.end());
  out.run = train(std::move(model), wt.set, wv.set, config, config_snapshot, dataset_digest(all), on_epoch);
  return out;
}

}  // namespace magloc::trainer
