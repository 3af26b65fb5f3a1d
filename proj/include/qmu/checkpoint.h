// Copyright 2026 The QMU Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QMU_CHECKPOINT_H_
#define QMU_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "qmu/circuit.h"

namespace qmu {

// On-disk model parameters:
//   {"n_params": 72, "param_order_tag": "...", "values": [...],
//    "metadata": {"dataset": "...", "seed": 0, "stage": "original"}}
// Doubles are written in shortest round-trip form, so Load(Save(c)) == c.
struct Checkpoint {
  ParamVector params;
  std::string param_order_tag = kParamOrderTag;
  std::string dataset;
  std::uint64_t seed = 0;
  std::string stage;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

nlohmann::json CheckpointToJson(const Checkpoint& checkpoint);
// Throws ParseError on schema violations (wrong n_params, unknown order tag).
Checkpoint CheckpointFromJson(const nlohmann::json& j);

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// Shared helpers for the JSON artifacts written by the pipeline.
void WriteJsonFile(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteTextFile(const std::string& text, const std::filesystem::path& path);

}  // namespace qmu

#endif  // QMU_CHECKPOINT_H_
