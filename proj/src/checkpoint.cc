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

#include "qmu/checkpoint.h"

#include <fstream>
#include <sstream>
#include <vector>

#include "qmu/errors.h"

namespace qmu {

nlohmann::json CheckpointToJson(const Checkpoint& checkpoint) {
  nlohmann::json j;
  j["n_params"] = checkpoint.params.size();
  j["param_order_tag"] = checkpoint.param_order_tag;
  j["values"] = checkpoint.params.values();
  j["metadata"] = {{"dataset", checkpoint.dataset},
                   {"seed", checkpoint.seed},
                   {"stage", checkpoint.stage}};
  return j;
}

Checkpoint CheckpointFromJson(const nlohmann::json& j) {
  try {
    if (j.at("n_params").get<int>() != kNumParams) {
      throw ParseError("checkpoint n_params must be " +
                       std::to_string(kNumParams));
    }
    Checkpoint out;
    out.param_order_tag = j.at("param_order_tag").get<std::string>();
    if (out.param_order_tag != kParamOrderTag) {
      throw ParseError("unsupported param_order_tag '" + out.param_order_tag +
                       "'");
    }
    out.params = ParamVector(j.at("values").get<std::vector<double>>());
    const auto& meta = j.at("metadata");
    out.dataset = meta.at("dataset").get<std::string>();
    out.seed = meta.at("seed").get<std::uint64_t>();
    out.stage = meta.at("stage").get<std::string>();
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const Checkpoint& checkpoint,
                    const std::filesystem::path& path) {
  WriteJsonFile(CheckpointToJson(checkpoint), path);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromJson(ReadJsonFile(path));
}

void WriteTextFile(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void WriteJsonFile(const nlohmann::json& j, const std::filesystem::path& path) {
  WriteTextFile(j.dump(2) + "\n", path);
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace qmu
