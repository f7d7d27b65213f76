#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/data/trial.hpp"
#include "magloc/features/gravity.hpp"
#include "magloc/numkit/tensor.hpp"

namespace magloc::features {

inline constexpr std::size_t kWindowLength = 200;

enum class Mode { Raw3d, Inv2d };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& s);  // throws ConfigError
std::size_t channel_count(Mode mode);
std::vector<std::string> channel_names(Mode mode);

struct WindowMeta {
  std::string building;
  int trial_id = 0;
  std::size_t end_index = 0;  // sample index of the window's last column

  bool operator==(const WindowMeta&) const = default;
};

struct FeatureWindow {
  numkit::Tensor<float> matrix;  // [channels x W]
  std::array<double, 2> target{};
  WindowMeta meta;
};

/// Per-sample feature channels of one trial, channel-major [C x N].
struct FeatureStream {
  std::string building;
  int trial_id = 0;
  std::size_t length = 0;
  std::size_t first_index = 0;  // trial sample index of column 0
  std::vector<float> values;
  std::vector<std::array<double, 2>> positions;  // ground-truth (x, y) per sample

  const float* channel(std::size_t c) const { return values.data() + c * length; }
};

/// Feature channels for every sample of a trial: (M_x, M_y, M_z) or (M_n, M_g).
FeatureStream compute_features(const data::Trial& trial, Mode mode,
                               double gravity_alpha = kDefaultGravityAlpha);

/// Overlapping windows over one or more feature streams. Windows are views
/// (stream, start) so stride-1 sets stay small; gather() materializes batches.
class WindowSet {
 public:
  WindowSet(Mode mode, std::size_t window);

  Mode mode() const noexcept { return mode_; }
  std::size_t window() const noexcept { return window_; }
  std::size_t channels() const noexcept { return channel_count(mode_); }
  std::size_t size() const noexcept { return refs_.size(); }
  bool empty() const noexcept { return refs_.empty(); }

  /// Adds floor((N - W) / stride) + 1 windows from `stream`; none if N < W.
  /// Returns the number added.
  std::size_t add(FeatureStream stream, std::size_t stride);
  /// Adds a single prebuilt window (used when loading blobs).
  void add_window(const FeatureWindow& w);

  FeatureWindow at(std::size_t i) const;
  WindowMeta meta(std::size_t i) const;
  std::array<double, 2> target(std::size_t i) const;

  /// Copies windows idx[0..B) into out as [B x C x W].
  void gather(std::span<const std::size_t> idx, float* out) const;
  numkit::Tensor<float> gather(std::span<const std::size_t> idx) const;

  std::vector<FeatureStream>& streams() noexcept { return streams_; }
  const std::vector<FeatureStream>& streams() const noexcept { return streams_; }

 private:
  struct Ref {
    std::uint32_t stream;
    std::uint32_t start;
  };

  Mode mode_;
  std::size_t window_;
  std::vector<FeatureStream> streams_;
  std::vector<Ref> refs_;
};

struct WindowOptions {
  Mode mode = Mode::Raw3d;
  std::size_t window = kWindowLength;
  std::size_t stride = 1;
  double gravity_alpha = kDefaultGravityAlpha;
};

struct WindowResult {
  WindowSet set;
  std::vector<std::string> warnings;  // trials shorter than W
};

WindowResult make_windows(std::span<const data::Trial> trials, const WindowOptions& options);
WindowResult make_windows(const data::Trial& trial, const WindowOptions& options);

/// Per-channel mean and population standard deviation over every element of
/// every window (overlapping samples count once per window that covers them).
struct ChannelStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> std;

  /// Throws DataError naming the channel if its deviation is zero.
  static ChannelStats fit(const WindowSet& train);
  nlohmann::json to_json() const;
  static ChannelStats from_json(const nlohmann::json& j);
  bool operator==(const ChannelStats&) const = default;
};

/// (x - mean) / std per channel, in place.
void standardize(WindowSet& windows, const ChannelStats& stats);

/// Binary blob: "MAGW" | u32 version | u32 mode | u32 W | u32 channels |
/// u64 count | f32 windows [count x C x W] | f64 targets [count x 2].
/// The JSON sidecar carries the stats and per-window metadata.
void save_windows(const WindowSet& windows, const ChannelStats* stats,
                  const std::filesystem::path& blob, const std::filesystem::path& sidecar);
WindowSet load_windows(const std::filesystem::path& blob, const std::filesystem::path& sidecar);

}  // namespace magloc::features
