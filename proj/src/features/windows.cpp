#include "magloc/features/windows.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "magloc/errors.hpp"
#include "magloc/util/binary.hpp"

namespace magloc::features {

std::string to_string(Mode mode) { return mode == Mode::Raw3d ? "raw3d" : "inv2d"; }

Mode mode_from_string(const std::string& s) {
  if (s == "raw3d") return Mode::Raw3d;
  if (s == "inv2d") return Mode::Inv2d;
  throw ConfigError("unknown mode '" + s + "' (expected raw3d or inv2d)");
}

std::size_t channel_count(Mode mode) { return mode == Mode::Raw3d ? 3 : 2; }

std::vector<std::string> channel_names(Mode mode) {
  if (mode == Mode::Raw3d) return {"M_x", "M_y", "M_z"};
  return {"M_n", "M_g"};
}

FeatureStream compute_features(const data::Trial& trial, Mode mode, double gravity_alpha) {
  const std::size_t n = trial.records.size();
  FeatureStream s;
  s.building = trial.building;
  s.trial_id = trial.trial_id;
  s.length = n;
  s.values.resize(channel_count(mode) * n);
  s.positions.reserve(n);
  for (const auto& r : trial.records) s.positions.push_back({r.pos.x, r.pos.y});
  if (n == 0) return s;

  float* c0 = s.values.data();
  float* c1 = c0 + n;
  if (mode == Mode::Raw3d) {
    float* c2 = c1 + n;
    for (std::size_t i = 0; i < n; ++i) {
      c0[i] = static_cast<float>(trial.records[i].mag.x);
      c1[i] = static_cast<float>(trial.records[i].mag.y);
      c2[i] = static_cast<float>(trial.records[i].mag.z);
    }
    return s;
  }
  std::vector<Vec3> acc(n);
  for (std::size_t i = 0; i < n; ++i) acc[i] = trial.records[i].acc;
  const auto gravity = estimate_gravity(acc, gravity_alpha);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = invariant_features(trial.records[i].mag, gravity.g[i]);
    c0[i] = static_cast<float>(f.m_n);
    c1[i] = static_cast<float>(f.m_g);
  }
  return s;
}

WindowSet::WindowSet(Mode mode, std::size_t window) : mode_(mode), window_(window) {
  require(window >= 1, "window length must be >= 1");
}

std::size_t WindowSet::add(FeatureStream stream, std::size_t stride) {
  require(stride >= 1, "window stride must be >= 1");
  require(stream.values.size() == channels() * stream.length, "feature stream channel count mismatch");
  if (stream.length < window_) return 0;
  const auto index = static_cast<std::uint32_t>(streams_.size());
  const std::size_t count = (stream.length - window_) / stride + 1;
  for (std::size_t k = 0; k < count; ++k) refs_.push_back({index, static_cast<std::uint32_t>(k * stride)});
  streams_.push_back(std::move(stream));
  return count;
}

void WindowSet::add_window(const FeatureWindow& w) {
  if (w.matrix.shape() != numkit::Shape{channels(), window_}) {
    throw ShapeError("window shape " + numkit::to_string(w.matrix.shape()) + " does not match set");
  }
  require(w.meta.end_index + 1 >= window_, "window end index precedes its first sample");
  FeatureStream s;
  s.building = w.meta.building;
  s.trial_id = w.meta.trial_id;
  s.length = window_;
  s.first_index = w.meta.end_index + 1 - window_;
  s.values.assign(w.matrix.values().begin(), w.matrix.values().end());
  // Only the final position is known; it is the one the window targets.
  s.positions.assign(window_, w.target);
  const auto index = static_cast<std::uint32_t>(streams_.size());
  streams_.push_back(std::move(s));
  refs_.push_back({index, 0});
}

WindowMeta WindowSet::meta(std::size_t i) const {
  const Ref r = refs_.at(i);
  const auto& s = streams_[r.stream];
  return {s.building, s.trial_id, s.first_index + r.start + window_ - 1};
}

std::array<double, 2> WindowSet::target(std::size_t i) const {
  const Ref r = refs_.at(i);
  return streams_[r.stream].positions[r.start + window_ - 1];
}

FeatureWindow WindowSet::at(std::size_t i) const {
  FeatureWindow w;
  w.matrix = numkit::Tensor<float>(numkit::Shape{channels(), window_});
  const std::size_t idx[1] = {i};
  gather(idx, w.matrix.values().data());
  w.target = target(i);
  w.meta = meta(i);
  return w;
}

void WindowSet::gather(std::span<const std::size_t> idx, float* out) const {
  const std::size_t c_count = channels();
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const Ref r = refs_.at(idx[b]);
    const auto& s = streams_[r.stream];
    for (std::size_t c = 0; c < c_count; ++c) {
      std::memcpy(out + (b * c_count + c) * window_, s.channel(c) + r.start, window_ * sizeof(float));
    }
  }
}

numkit::Tensor<float> WindowSet::gather(std::span<const std::size_t> idx) const {
  require(!idx.empty(), "gather: empty batch");
  numkit::Tensor<float> out(numkit::Shape{idx.size(), channels(), window_});
  gather(idx, out.values().data());
  return out;
}

WindowResult make_windows(std::span<const data::Trial> trials, const WindowOptions& options) {
  WindowResult result{WindowSet(options.mode, options.window), {}};
  for (const auto& trial : trials) {
    if (trial.records.size() < options.window) {
      result.warnings.push_back("trial " + trial.building + "/" + std::to_string(trial.trial_id) + " has " +
                                std::to_string(trial.records.size()) + " samples, fewer than W=" +
                                std::to_string(options.window) + "; no windows");
      continue;
    }
    result.set.add(compute_features(trial, options.mode, options.gravity_alpha), options.stride);
  }
  return result;
}

WindowResult make_windows(const data::Trial& trial, const WindowOptions& options) {
  return make_windows(std::span<const data::Trial>(&trial, 1), options);
}

ChannelStats ChannelStats::fit(const WindowSet& train) {
  if (train.empty()) throw DataError("cannot fit channel statistics: empty dataset");
  const std::size_t channels = train.channels(), w = train.window();
  ChannelStats stats;
  stats.names = channel_names(train.mode());
  stats.mean.assign(channels, 0.0);
  stats.std.assign(channels, 0.0);
  const double total = static_cast<double>(train.size()) * static_cast<double>(w);
  std::vector<float> buf(channels * w);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t idx[1] = {i};
    train.gather(idx, buf.data());
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < w; ++t) stats.mean[c] += buf[c * w + t];
  }
  for (auto& m : stats.mean) m /= total;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const std::size_t idx[1] = {i};
    train.gather(idx, buf.data());
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t t = 0; t < w; ++t) {
        const double d = buf[c * w + t] - stats.mean[c];
        stats.std[c] += d * d;
      }
  }
  for (std::size_t c = 0; c < channels; ++c) {
    stats.std[c] = std::sqrt(stats.std[c] / total);
    if (!(stats.std[c] > 1e-9 * std::max(1.0, std::abs(stats.mean[c])))) {
      throw DataError("zero variance in channel " + stats.names[c] + " of the training windows");
    }
  }
  return stats;
}

nlohmann::json ChannelStats::to_json() const { return {{"names", names}, {"mean", mean}, {"std", std}}; }

ChannelStats ChannelStats::from_json(const nlohmann::json& j) {
  ChannelStats s;
  try {
    s.names = j.at("names").get<std::vector<std::string>>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("channel stats: ") + e.what());
  }
  if (s.mean.size() != s.names.size() || s.std.size() != s.names.size())
    throw DataError("channel stats: inconsistent channel counts");
  return s;
}

void standardize(WindowSet& windows, const ChannelStats& stats) {
  if (stats.mean.size() != windows.channels()) {
    throw ShapeError("channel stats have " + std::to_string(stats.mean.size()) + " channels, windows have " +
                     std::to_string(windows.channels()));
  }
  for (auto& s : windows.streams()) {
    for (std::size_t c = 0; c < windows.channels(); ++c) {
      float* v = s.values.data() + c * s.length;
      for (std::size_t t = 0; t < s.length; ++t)
        v[t] = static_cast<float>((static_cast<double>(v[t]) - stats.mean[c]) / stats.std[c]);
    }
  }
}

namespace {
constexpr char kWindowMagic[4] = {'M', 'A', 'G', 'W'};
constexpr std::uint32_t kWindowVersion = 1;
}  // namespace

void save_windows(const WindowSet& windows, const ChannelStats* stats, const std::filesystem::path& blob,
                  const std::filesystem::path& sidecar) {
  util::ByteWriter w;
  w.bytes(kWindowMagic, 4);
  w.le<std::uint32_t>(kWindowVersion);
  w.le<std::uint32_t>(windows.mode() == Mode::Raw3d ? 0u : 1u);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(windows.window()));
  w.le<std::uint32_t>(static_cast<std::uint32_t>(windows.channels()));
  w.le<std::uint64_t>(windows.size());
  std::vector<float> buf(windows.channels() * windows.window());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::size_t idx[1] = {i};
    windows.gather(idx, buf.data());
    for (float f : buf) w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(f));
  }
  nlohmann::json meta = nlohmann::json::array();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto t = windows.target(i);
    w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(t[0]));
    w.le<std::uint64_t>(std::bit_cast<std::uint64_t>(t[1]));
    const auto m = windows.meta(i);
    meta.push_back({m.building, m.trial_id, m.end_index});
  }
  util::write_file_bytes(blob, w.take());

  nlohmann::json side{{"mode", to_string(windows.mode())},
                      {"window", windows.window()},
                      {"channels", windows.channels()},
                      {"count", windows.size()},
                      {"meta", meta}};
  side["stats"] = stats ? stats->to_json() : nlohmann::json(nullptr);
  std::ofstream out(sidecar);
  if (!out) throw IoError("cannot write " + sidecar.string());
  out << side.dump() << '\n';
}

WindowSet load_windows(const std::filesystem::path& blob, const std::filesystem::path& sidecar) {
  const auto bytes = util::read_file_bytes(blob);
  util::ByteReader r(bytes, "window blob");
  if (std::memcmp(r.bytes(4).data(), kWindowMagic, 4) != 0) throw IoError("not a window blob (bad magic)");
  if (r.le<std::uint32_t>() != kWindowVersion) throw IoError("unsupported window blob version");
  const Mode mode = r.le<std::uint32_t>() == 0 ? Mode::Raw3d : Mode::Inv2d;
  const std::size_t window = r.le<std::uint32_t>();
  const std::size_t channels = r.le<std::uint32_t>();
  const std::size_t count = r.le<std::uint64_t>();
  if (channels != channel_count(mode)) throw IoError("window blob channel count does not match its mode");
  if (count > r.remaining() / (channels * window * 4 + 16)) throw IoError("window blob truncated");

  std::ifstream in(sidecar);
  if (!in) throw IoError("cannot open " + sidecar.string());
  const auto side = nlohmann::json::parse(in, nullptr, false);
  if (side.is_discarded() || !side.contains("meta") || side["meta"].size() != count)
    throw IoError("window sidecar does not match blob");

  std::vector<FeatureWindow> loaded(count);
  for (auto& fw : loaded) {
    fw.matrix = numkit::Tensor<float>(numkit::Shape{channels, window});
    for (auto& f : fw.matrix.values()) f = std::bit_cast<float>(r.le<std::uint32_t>());
  }
  WindowSet set(mode, window);
  for (std::size_t i = 0; i < count; ++i) {
    auto& fw = loaded[i];
    fw.target[0] = std::bit_cast<double>(r.le<std::uint64_t>());
    fw.target[1] = std::bit_cast<double>(r.le<std::uint64_t>());
    const auto& m = side["meta"][i];
    fw.meta = {m.at(0).get<std::string>(), m.at(1).get<int>(), m.at(2).get<std::size_t>()};
    set.add_window(fw);
  }
  if (!r.done()) throw IoError("window blob has trailing bytes");
  return set;
}

}  // namespace magloc::features
