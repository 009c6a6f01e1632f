// Copyright 2026 The mrc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>

#include <nlohmann/json.hpp>

#include "mrc/model.hpp"

namespace mrc {

// JSON checkpoint, format_version 1:
//
//   {
//     "format": "mrc-checkpoint",
//     "format_version": 1,
//     "model": {"input_dim": d, "trunk_dims": [...], "branch_dim": k,
//               "multi_branch": true, "seed": s},
//     "metadata": {...},                       // free-form, e.g. run config
//     "tensors": [{"name": "trunk.0.weight", "shape": [rows, cols],
//                  "values": [row-major reals]}, ...]
//   }
//
// Tensor order and names follow ModelParams::for_each_tensor. Reals are
// written with 17 significant digits, so a save/load round trip is exact.
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  nlohmann::json metadata = nlohmann::json::object();
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& doc);

}  // namespace mrc
