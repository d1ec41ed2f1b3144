#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdsr/nn/layer.hpp"

namespace sdsr::nn {

// Binary parameter-tree checkpoint: magic + format version, arch id, scale,
// config hash, then named double tensors in declaration order.
struct CheckpointMeta {
  std::string arch_id;
  int scale = 0;
  uint64_t config_hash = 0;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const CheckpointMeta& meta,
                     const std::vector<Param*>& params);

// Loads into an already-built parameter tree; names and shapes must match.
CheckpointMeta load_checkpoint(const std::string& path, const std::vector<Param*>& params);

CheckpointMeta peek_checkpoint(const std::string& path);

}  // namespace sdsr::nn
