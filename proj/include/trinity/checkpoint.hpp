#ifndef TRINITY_CHECKPOINT_HPP_
#define TRINITY_CHECKPOINT_HPP_

// Checkpoint container, little-endian:
//
//   magic            8 bytes  "TRNYCKPT"
//   schema_version   u32      currently 1
//   config_hash      u64      FNV-1a of the ModelConfig JSON
//   section_count    u32
//   section table    section_count x { name: str, offset: u64, size: u64 }
//   payloads         at the recorded absolute offsets
//
// str is a u32 byte length followed by UTF-8 bytes. Sections:
//   config   ModelConfig as JSON text
//   lineage  i32 created_day, u8 accepted, str parent_id
//   params   u32 block count, then per block { str name, u32 rows, u32 cols, f64[rows*cols] row-major }
//   norm     u32 n, f64 epsilon, f64 mean[n], f64 std[n]
//   bins     u32 features, u32 n_buckets, u8 reserve_zero, per feature { u32 len, f64[len] }
//   adam     u64 step, then first and second moments in the params layout

#include <filesystem>
#include <string>
#include <string_view>

#include "trinity/model.hpp"

namespace trinity {

inline constexpr std::string_view kCheckpointMagic = "TRNYCKPT";
inline constexpr std::uint32_t kCheckpointSchemaVersion = 1;

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint deserialize_checkpoint(std::string_view bytes);

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace trinity

#endif  // TRINITY_CHECKPOINT_HPP_
