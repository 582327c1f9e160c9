// Copyright 2026 The QHBM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QHBM_CHECKPOINT_HPP
#define QHBM_CHECKPOINT_HPP

#include <filesystem>
#include <vector>

#include "json.hpp"
#include "qhbm/train.hpp"

namespace qhbm {

// Checkpoint file layout (integers and floats little-endian):
//   "QHBMCKPT"            8 bytes
//   format version        u32
//   metadata length       u64
//   metadata              UTF-8 JSON; "payloads" lists {name, length} in order
//   payloads              float64 arrays, back to back, lengths as declared
inline constexpr char kCheckpointMagic[] = "QHBMCKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  TrainState state;
  std::vector<EpochRecord> history;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws DataError on a bad magic, truncated payload or unknown version.
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const TrainConfig& config);

/// Strict: unknown keys raise ConfigError. Missing keys keep `base` values.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

nlohmann::json to_json(const EpochRecord& record);
EpochRecord epoch_record_from_json(const nlohmann::json& j);

std::string to_string(EmbedMode mode);
std::string to_string(Proposal proposal);
std::string to_string(DuplicateMode mode);
std::string to_string(PartitionMode mode);
std::string to_string(Convention convention);
std::string to_string(LatentMode mode);

EmbedMode parse_embed_mode(const std::string& s);
Proposal parse_proposal(const std::string& s);
DuplicateMode parse_duplicate_mode(const std::string& s);
PartitionMode parse_partition_mode(const std::string& s);
Convention parse_convention(const std::string& s);
LatentMode parse_latent_mode(const std::string& s);

}  // namespace qhbm

#endif
