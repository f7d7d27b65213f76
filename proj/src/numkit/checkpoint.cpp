#include "magloc/numkit/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "magloc/util/binary.hpp"
#include "magloc/util/text.hpp"

namespace magloc::numkit {

std::size_t count_params(std::span<const NamedTensor> params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value.size();
  return n;
}

std::string config_digest(const nlohmann::json& config) {
  return util::hex_digest(config.dump());
}

namespace {

constexpr char kMagic[4] = {'M', 'A', 'G', 'N'};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  util::ByteWriter w;
  w.bytes(kMagic, 4);
  w.le<std::uint32_t>(kCheckpointVersion);
  const std::string meta = checkpoint.metadata.dump();
  w.le<std::uint64_t>(meta.size());
  w.bytes(meta.data(), meta.size());
  w.le<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.parameters.size()));
  for (const auto& p : checkpoint.parameters) {
    w.le<std::uint32_t>(static_cast<std::uint32_t>(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t extent : p.value.shape()) w.le<std::uint64_t>(extent);
    for (float f : p.value.values()) w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(f));
  }
  return w.take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes,
                                  const std::optional<std::string>& expected_digest) {
  util::ByteReader r(bytes, "checkpoint");
  auto magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw IoError("not a checkpoint (bad magic)");
  const auto version = r.le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                  std::to_string(kCheckpointVersion) + ")");
  }
  const auto meta_len = r.le<std::uint64_t>();
  auto meta = r.bytes(meta_len);
  Checkpoint ck;
  try {
    ck.metadata = nlohmann::json::parse(meta.begin(), meta.end());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
  }
  if (!ck.metadata.contains("config") || !ck.metadata.contains("config_digest")) {
    throw IoError("checkpoint metadata lacks config or config_digest");
  }
  const std::string stored = ck.metadata.at("config_digest").get<std::string>();
  if (config_digest(ck.metadata.at("config")) != stored) {
    throw IoError("checkpoint config digest mismatch: stored " + stored + ", recomputed " +
                  config_digest(ck.metadata.at("config")));
  }
  if (expected_digest && *expected_digest != stored) {
    throw IoError("checkpoint config digest " + stored + " does not match expected " + *expected_digest);
  }
  const auto count = r.le<std::uint32_t>();
  for (std::uint32_t n = 0; n < count; ++n) {
    NamedTensor p;
    const auto name_len = r.le<std::uint32_t>();
    auto name = r.bytes(name_len);
    p.name.assign(name.begin(), name.end());
    const auto rank = r.le<std::uint32_t>();
    Shape shape(rank);
    for (auto& extent : shape) extent = r.le<std::uint64_t>();
    const std::size_t elements = element_count(shape);
    if (elements > r.remaining() / 4) throw IoError("checkpoint truncated");
    std::vector<float> values(elements);
    for (auto& f : values) f = std::bit_cast<float>(r.le<std::uint32_t>());
    p.value = Tensor<float>(std::move(shape), std::move(values));
    ck.parameters.push_back(std::move(p));
  }
  if (!r.done()) throw IoError("checkpoint has trailing bytes");
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  util::write_file_bytes(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_digest) {
  return deserialize_checkpoint(util::read_file_bytes(path), expected_digest);
}

}  // namespace magloc::numkit
