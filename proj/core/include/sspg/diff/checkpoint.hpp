#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "sspg/diff/params.hpp"

namespace sspg::diff {

/// Version tag carried by every checkpoint document.
inline constexpr const char* kCheckpointVersion = "sspg-ckpt-1";

/// {"step": n, "params": {name: {"shape": [r, c], "data": [...], "m": [...], "v": [...]}}}
/// Arrays are flattened row-major.
nlohmann::json store_to_json(const ParamStore& store);

/// Inverse of store_to_json. Throws CheckpointError on malformed input.
ParamStore store_from_json(const nlohmann::json& doc);

/// Throws CheckpointError unless doc["version"] == kCheckpointVersion.
void require_checkpoint_version(const nlohmann::json& doc);

}  // namespace sspg::diff
