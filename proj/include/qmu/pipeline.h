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

// Seeded, manifest-driven orchestration of train / gold / unlearn / eval /
// ablate. Every command writes under `out_dir` and records the full flat
// configuration it ran with, so `--config <manifest>` replays it.

#ifndef QMU_PIPELINE_H_
#define QMU_PIPELINE_H_

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmu/data.h"
#include "qmu/evaluation.h"
#include "qmu/training.h"
#include "qmu/unlearning.h"

namespace qmu {

struct RunConfig {
  DataConfig data = DefaultDataConfig(DatasetKind::kIris);
  TrainConfig train;
  UnlearnConfig unlearn;
  double anchor_fraction = 1.0;
  std::optional<int> forget_class;
  KlDirection kl_direction = KlDirection::kGoldToUnlearned;
  std::filesystem::path out_dir = "out";
  // Empty means the default file under out_dir.
  std::filesystem::path original_checkpoint;
  std::filesystem::path gold_checkpoint;
  std::filesystem::path unlearned_checkpoint;

  std::filesystem::path OriginalPath() const;
  std::filesystem::path GoldPath() const;
  std::filesystem::path UnlearnedPath() const;
};

// The flat dotted-key view of a RunConfig ("train.iterations", "seed", ...).
using ConfigMap = std::map<std::string, std::string>;

RunConfig DefaultRunConfig(DatasetKind kind = DatasetKind::kIris);

// Switching `dataset` resets the dataset-dependent defaults (path, split).
// Throws ConfigError for unknown keys or unparsable values.
void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value);
void ApplyConfigMap(RunConfig& config, const ConfigMap& values);
ConfigMap ConfigToMap(const RunConfig& config);

// Reads either a flat {"key": value} file or a run manifest (whose "config"
// member is such an object).
ConfigMap LoadConfigFile(const std::filesystem::path& path);

// Checks ranges and that the data file exists (IoError naming the path).
void ValidateRunConfig(const RunConfig& config);

struct TrainOutcome {
  TrainedModel model;
  PreparedData prepared;
};

TrainOutcome CmdTrain(const RunConfig& config);
TrainOutcome CmdGold(const RunConfig& config);
UnlearnResult CmdUnlearn(const RunConfig& config);
EvalReport CmdEval(const RunConfig& config);

enum class SweepAxis { kBeta, kAlpha, kLambda, kAnchorFraction, kClasswise };

SweepAxis ParseSweepAxis(const std::string& name);
std::string SweepAxisName(SweepAxis axis);
std::vector<double> DefaultSweepValues(SweepAxis axis);

struct SweepRow {
  double setting = 0.0;
  int forget_class = 0;
  double test_acc_before = 0.0;
  double test_acc_after = 0.0;
  double retained_acc_before = 0.0;
  double retained_acc_after = 0.0;
  double p_f_before = 0.0;
  double p_f_after = 0.0;
};

// One unlearning run per value, all from the same original checkpoint
// (trained and saved first if absent). Writes sweep_<axis>.csv/.json and a
// subdirectory per setting.
std::vector<SweepRow> CmdAblate(const RunConfig& config, SweepAxis axis,
                                std::vector<double> values = {});

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUnknown = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitParse = 5;

// Command-line entry point: qmu <train|gold|unlearn|eval|ablate> [flags].
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace qmu

#endif  // QMU_PIPELINE_H_
