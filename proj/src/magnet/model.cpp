#include "magloc/magnet/model.hpp"

#include "magloc/errors.hpp"

namespace magloc::magnet {

using numkit::Shape;
using numkit::Tensor;

NetLayout layout_of(const MagNetConfig& config) {
  NetLayout layout;
  layout.input_channels = config.input_channels;
  layout.hidden = config.hidden;
  layout.outputs = config.outputs;
  layout.padding = config.padding;
  std::size_t in = config.input_channels;
  for (std::size_t i = 0; i < config.channels.size(); ++i) {
    layout.convs.push_back({in, config.channels[i], config.kernels.at(i), config.dilations.at(i)});
    in = config.channels[i];
  }
  return layout;
}

nlohmann::json TargetScaling::to_json() const { return {{"mean", mean}, {"std", std}}; }

TargetScaling TargetScaling::from_json(const nlohmann::json& j) {
  TargetScaling s;
  s.mean = j.at("mean").get<std::array<double, 2>>();
  s.std = j.at("std").get<std::array<double, 2>>();
  return s;
}

Model Model::build(const MagNetConfig& config, std::uint64_t seed) {
  config.validate();
  Model m;
  m.config_ = config;
  m.net_ = ConvRegressor<float>::he_uniform(layout_of(config), seed);
  return m;
}

std::array<double, 2> Model::forward(const Tensor<float>& window) const {
  if (window.rank() != 2) throw ShapeError("forward expects a [C x W] window, got " + numkit::to_string(window.shape()));
  Tensor<float> batch(Shape{1, window.dim(0), window.dim(1)}, std::vector<float>(window.values().begin(), window.values().end()));
  const auto p = predict(batch);
  return {p[0], p[1]};
}

Tensor<double> Model::predict(const Tensor<float>& batch) const {
  const auto out = net_.forward(batch);
  const std::size_t b = out.rank() == 2 ? out.dim(0) : 1;
  Tensor<double> meters(Shape{b, 2});
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t a = 0; a < 2; ++a)
      meters.values()[i * 2 + a] = static_cast<double>(out[i * 2 + a]) * target_scaling.std[a] + target_scaling.mean[a];
  return meters;
}

std::vector<numkit::NamedTensor> Model::named_parameters() const {
  std::vector<numkit::NamedTensor> out;
  const auto specs = net_.layout().parameters();
  for (std::size_t i = 0; i < specs.size(); ++i) out.push_back({specs[i].name, net_.parameters()[i]});
  return out;
}

std::string Model::config_digest() const { return numkit::config_digest(config_.to_json()); }

numkit::Checkpoint Model::to_checkpoint(const nlohmann::json& extra) const {
  numkit::Checkpoint ck;
  ck.metadata = extra.is_object() ? extra : nlohmann::json::object();
  ck.metadata["config"] = config_.to_json();
  ck.metadata["config_digest"] = config_digest();
  ck.metadata["stats"] = stats ? stats->to_json() : nlohmann::json(nullptr);
  ck.metadata["target_scaling"] = target_scaling.to_json();
  ck.parameters = named_parameters();
  return ck;
}

Model Model::from_checkpoint(const numkit::Checkpoint& ck) {
  Model m;
  try {
    m.config_ = MagNetConfig::from_json(ck.metadata.at("config"));
    if (!ck.metadata.at("stats").is_null()) m.stats = features::ChannelStats::from_json(ck.metadata.at("stats"));
    m.target_scaling = TargetScaling::from_json(ck.metadata.at("target_scaling"));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint metadata: ") + e.what());
  }
  const auto layout = layout_of(m.config_);
  const auto specs = layout.parameters();
  if (specs.size() != ck.parameters.size()) throw IoError("checkpoint parameter count does not match its config");
  std::vector<Tensor<float>> params;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (ck.parameters[i].name != specs[i].name)
      throw IoError("checkpoint parameter " + ck.parameters[i].name + " where " + specs[i].name + " expected");
    params.push_back(ck.parameters[i].value);
  }
  m.net_ = ConvRegressor<float>(layout, std::move(params));
  return m;
}

void Model::save(const std::filesystem::path& path, const nlohmann::json& extra) const {
  numkit::save_checkpoint(to_checkpoint(extra), path);
}

Model Model::load(const std::filesystem::path& path, const std::optional<std::string>& expected_digest) {
  return from_checkpoint(numkit::load_checkpoint(path, expected_digest));
}

}  // namespace magloc::magnet
