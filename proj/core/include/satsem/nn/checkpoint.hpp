// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container: a JSON header (kind, config, seeds, manifest) followed
// by a raw little-endian float32 blob of all parameters. Files are
// content-addressed with FNV-1a so dependent artifacts can pin exact weights.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "satsem/nn/graph.hpp"

namespace satsem::nn {

struct CheckpointInfo {
    std::string kind;          // "ct", "nct", "selector", ...
    nlohmann::json config;     // run configuration snapshot
    std::uint64_t seed = 0;    // training seed
    nlohmann::json extra;      // free-form (metrics, referenced hashes, ...)
};

void save_checkpoint(const std::string& path, const CheckpointInfo& info,
                     const std::vector<Param<float>*>& params);

// Loads the header and fills `params` (matched by name; throws on mismatch).
CheckpointInfo load_checkpoint(const std::string& path, const std::vector<Param<float>*>& params);

// Header only; no parameter restore.
CheckpointInfo peek_checkpoint(const std::string& path);

// FNV-1a content hash of a file on disk, hex-encoded.
std::string file_content_hash(const std::string& path);

}  // namespace satsem::nn
