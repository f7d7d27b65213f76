#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "magloc/numkit/tensor.hpp"

namespace magloc::numkit {

struct NamedTensor {
  std::string name;
  Tensor<float> value;

  bool operator==(const NamedTensor&) const = default;
};

std::size_t count_params(std::span<const NamedTensor> params);

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// On-disk layout, all integers little-endian:
///   "MAGN" | u32 version | u64 json length | json metadata
///   | u32 tensor count | per tensor: u32 name length, name, u32 rank,
///     u64 extents[rank], f32 payload
/// The metadata must carry "config" and "config_digest"; the digest is
/// recomputed on load.
struct Checkpoint {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<NamedTensor> parameters;
};

/// Hex FNV-1a digest of the canonical JSON dump of `config`.
std::string config_digest(const nlohmann::json& config);

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes,
                                  const std::optional<std::string>& expected_digest = {});

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_digest = {});

}  // namespace magloc::numkit
