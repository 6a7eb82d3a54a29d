#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "tgclstm/forecaster.hpp"

namespace tgclstm {

inline constexpr std::uint32_t kCheckpointVersion = 1;

using CheckpointMetadata = std::map<std::string, std::string>;

// Binary layout (little-endian):
//   "TGCLSTMC" | u32 version | u32 kind | u64 nodes | i32 order
//   u64 n_meta   { str key | str value }
//   u64 n_masks  { matrix }          hop masks, TGC-LSTM only
//   u8  has_laplacian [matrix]
//   u64 n_params { str name | matrix value | matrix rms }
//   u64 FNV-1a hash of every preceding byte
// where str = u64 length + bytes and matrix = u64 rows + u64 cols + f64 values.

void save_checkpoint(const std::filesystem::path& path, const Forecaster& model,
                     const CheckpointMetadata& metadata = {});

struct LoadedCheckpoint {
  std::unique_ptr<Forecaster> model;
  CheckpointMetadata metadata;
};

/// Rebuilds the model from the file. Throws FormatError on a bad magic,
/// version, hash or truncated payload; nothing is returned in that case.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Restores parameter values and RMSProp state into an existing model. The
/// file is fully validated (kind, node count, names, shapes) before `model`
/// is touched. Throws ShapeError on mismatch.
CheckpointMetadata load_checkpoint_into(const std::filesystem::path& path, Forecaster& model);

}  // namespace tgclstm
