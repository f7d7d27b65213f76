#include "magloc/magnet/config.hpp"

#include "magloc/errors.hpp"
#include "magloc/magnet/model.hpp"

namespace magloc::magnet {

std::string to_string(Variant v) { return v == Variant::S ? "S" : "XL"; }

Variant variant_from_string(const std::string& s) {
  if (s == "S") return Variant::S;
  if (s == "XL") return Variant::XL;
  throw ConfigError("unknown variant '" + s + "' (expected S or XL)");
}

MagNetConfig MagNetConfig::defaults(Variant variant, std::size_t input_channels) {
  MagNetConfig c;
  c.variant = variant;
  c.input_channels = input_channels;
  if (variant == Variant::XL) c.channels = {32, 32, 64, 64, 128, 128, 256};
  return c;
}

std::vector<std::string> MagNetConfig::violations() const {
  std::vector<std::string> out;
  if (kernels.size() != kLayerCount || dilations.size() != kLayerCount || channels.size() != kLayerCount) {
    out.push_back("layer count must be 7 (kernels " + std::to_string(kernels.size()) + ", dilations " +
                  std::to_string(dilations.size()) + ", channels " + std::to_string(channels.size()) + ")");
  }
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    if (dilations[i] != (std::size_t{1} << i)) {
      out.push_back("dilation of layer " + std::to_string(i + 1) + " must be " + std::to_string(1u << i));
    }
  }
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (kernels[i] < 5 || kernels[i] > 20)
      out.push_back("kernel of layer " + std::to_string(i + 1) + " must lie in [5, 20]");
    if (i > 0 && kernels[i] < kernels[i - 1])
      out.push_back("kernels must be non-decreasing (layer " + std::to_string(i + 1) + ")");
  }
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] == 0) out.push_back("channels of layer " + std::to_string(i + 1) + " must be positive");
    if (i > 0 && channels[i] < channels[i - 1])
      out.push_back("channels must be non-decreasing (layer " + std::to_string(i + 1) + ")");
  }
  const std::size_t last = variant == Variant::S ? 128 : 256;
  if (!channels.empty() && channels.back() != last)
    out.push_back("final channel count must be " + std::to_string(last) + " for variant " + to_string(variant));
  if (input_channels != 2 && input_channels != 3) out.push_back("input channels must be 2 or 3");
  if (hidden != 64) out.push_back("hidden dense size must be 64");
  if (outputs != 2) out.push_back("output size must be 2");
  return out;
}

void MagNetConfig::validate() const {
  auto problems = violations();
  if (problems.empty()) {
    const auto band = budget_band(variant);
    const auto count = layout_of(*this).parameter_count();
    if (count < band.lo || count > band.hi) {
      problems.push_back("parameter count " + std::to_string(count) + " outside the " + to_string(variant) +
                         " band [" + std::to_string(band.lo) + ", " + std::to_string(band.hi) + "]");
    }
  }
  if (problems.empty()) return;
  std::string msg = "invalid MagNet config:";
  for (const auto& p : problems) msg += " " + p + ";";
  throw ConfigError(msg);
}

nlohmann::json MagNetConfig::to_json() const {
  return {{"variant", to_string(variant)}, {"input_channels", input_channels}, {"kernels", kernels},
          {"dilations", dilations},        {"channels", channels},             {"hidden", hidden},
          {"outputs", outputs},
          {"padding", padding == numkit::Padding::Same ? "same" : "causal"}};
}

MagNetConfig MagNetConfig::from_json(const nlohmann::json& j) {
  MagNetConfig c;
  try {
    if (j.contains("variant")) c = defaults(variant_from_string(j.at("variant").get<std::string>()));
    for (const auto& [key, value] : j.items()) {
      if (key == "variant") continue;
      if (key == "input_channels") c.input_channels = value.get<std::size_t>();
      else if (key == "kernels") c.kernels = value.get<std::vector<std::size_t>>();
      else if (key == "dilations") c.dilations = value.get<std::vector<std::size_t>>();
      else if (key == "channels") c.channels = value.get<std::vector<std::size_t>>();
      else if (key == "hidden") c.hidden = value.get<std::size_t>();
      else if (key == "outputs") c.outputs = value.get<std::size_t>();
      else if (key == "padding") {
        const auto p = value.get<std::string>();
        if (p != "same" && p != "causal") throw ConfigError("padding must be same or causal");
        c.padding = p == "same" ? numkit::Padding::Same : numkit::Padding::Causal;
      } else {
        throw ConfigError("model config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

std::size_t receptive_field(const MagNetConfig& config) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < config.kernels.size() && i < config.dilations.size(); ++i)
    r += config.dilations[i] * (config.kernels[i] - 1);
  return r;
}

BudgetBand budget_band(Variant variant) {
  return variant == Variant::S ? BudgetBand{288'000, 432'000} : BudgetBand{750'000, 1'250'000};
}

std::size_t validate_budget(const MagNetConfig& config) {
  config.validate();
  return layout_of(config).parameter_count();
}

}  // namespace magloc::magnet
