#pragma once

#include <filesystem>

#include "json.hpp"
#include "sketchgen/train.hpp"

namespace sketchgen {

inline constexpr int kCheckpointVersion = 1;

/// Hyperparameters, vocabularies, every tensor with its shape, the Adam
/// moments, the epoch counter, the generator state and the loss history.
nlohmann::json checkpoint_to_json(const TrainState& state);
/// Validates the version and every tensor shape against the shapes implied
/// by the stored hyperparameters and vocabularies. Throws ShapeMismatch or
/// MalformedRecord.
TrainState checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
TrainState load_checkpoint(const std::filesystem::path& path);

}  // namespace sketchgen
