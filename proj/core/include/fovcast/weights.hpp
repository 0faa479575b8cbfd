#pragma once

// Model checkpoint files: a JSON manifest (family, architecture config,
// trained flag, per-tensor shapes, content digest) followed by the raw
// little-endian float64 parameter arrays in declaration order. Loading
// rebuilds the model from the manifest config and overwrites its parameters
// bit-for-bit, so a reloaded model reproduces identical forecasts.

#include <cstdint>
#include <string>

#include "fovcast/models.hpp"

namespace fovcast {

/** FNV-1a over the serialized parameter bytes; stable across runs. */
std::uint64_t weight_digest(const std::vector<nn::Tensor>& params);

/** Digest formatted as 16 lowercase hex digits. */
std::string weight_digest_hex(const std::vector<nn::Tensor>& params);

void save_trajectory_weights(const std::string& path, const TrajectoryModel& m);
TrajectoryModel load_trajectory_weights(const std::string& path);

void save_heatmap_weights(const std::string& path, const HeatmapModel& m);
HeatmapModel load_heatmap_weights(const std::string& path);

/** Peek at a checkpoint's family: "trajectory" or "heatmap". */
std::string checkpoint_family(const std::string& path);

}  // namespace fovcast
