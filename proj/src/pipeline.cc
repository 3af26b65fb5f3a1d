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

#include "qmu/pipeline.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "qmu/checkpoint.h"
#include "qmu/errors.h"

namespace qmu {
namespace {

namespace fs = std::filesystem;

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double ParseDoubleValue(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() ||
      ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

template <typename Int>
Int ParseIntValue(const std::string& key, const std::string& value) {
  Int out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (value.empty() || ec != std::errc() ||
      ptr != value.data() + value.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + value + "'");
  }
  return out;
}

bool ParseBoolValue(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

GradientMode ParseGradientMode(const std::string& key,
                               const std::string& value) {
  if (value == "shift_rule") return GradientMode::kShiftRule;
  if (value == "exact") return GradientMode::kExact;
  throw ConfigError("'" + key + "' must be shift_rule or exact, got '" +
                    value + "'");
}

std::string GradientModeName(GradientMode mode) {
  return mode == GradientMode::kShiftRule ? "shift_rule" : "exact";
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct KeySpec {
  Setter set;
  Getter get;
};

const std::map<std::string, KeySpec>& Keys() {
  static const auto* keys = new std::map<std::string, KeySpec>{
      {"dataset",
       {[](RunConfig& c, const std::string& v) {
          DatasetKind kind;
          if (v == "iris") {
            kind = DatasetKind::kIris;
          } else if (v == "covertype") {
            kind = DatasetKind::kCovertype;
          } else {
            throw ConfigError("dataset must be iris or covertype, got '" + v +
                              "'");
          }
          if (kind != c.data.kind) {
            const DataConfig defaults = DefaultDataConfig(kind);
            c.data.kind = kind;
            c.data.path = defaults.path;
            c.data.split = defaults.split;
          }
        },
        [](const RunConfig& c) { return DatasetName(c.data.kind); }}},
      {"data.path",
       {[](RunConfig& c, const std::string& v) { c.data.path = v; },
        [](const RunConfig& c) { return c.data.path.string(); }}},
      {"data.has_header",
       {[](RunConfig& c, const std::string& v) {
          c.data.has_header = ParseBoolValue("data.has_header", v);
        },
        [](const RunConfig& c) {
          return std::string(c.data.has_header ? "true" : "false");
        }}},
      {"seed",
       {[](RunConfig& c, const std::string& v) {
          const auto seed = ParseIntValue<std::uint64_t>("seed", v);
          c.data.seed = c.train.seed = c.unlearn.seed = seed;
        },
        [](const RunConfig& c) { return std::to_string(c.data.seed); }}},
      {"split.train",
       {[](RunConfig& c, const std::string& v) {
          c.data.split.train = ParseIntValue<std::size_t>("split.train", v);
        },
        [](const RunConfig& c) { return std::to_string(c.data.split.train); }}},
      {"split.val",
       {[](RunConfig& c, const std::string& v) {
          c.data.split.val = ParseIntValue<std::size_t>("split.val", v);
        },
        [](const RunConfig& c) { return std::to_string(c.data.split.val); }}},
      {"split.test",
       {[](RunConfig& c, const std::string& v) {
          c.data.split.test = ParseIntValue<std::size_t>("split.test", v);
        },
        [](const RunConfig& c) { return std::to_string(c.data.split.test); }}},
      {"covertype.cap",
       {[](RunConfig& c, const std::string& v) {
          c.data.covertype_cap = ParseIntValue<std::size_t>("covertype.cap", v);
        },
        [](const RunConfig& c) { return std::to_string(c.data.covertype_cap); }}},
      {"train.iterations",
       {[](RunConfig& c, const std::string& v) {
          c.train.iterations = ParseIntValue<int>("train.iterations", v);
        },
        [](const RunConfig& c) { return std::to_string(c.train.iterations); }}},
      {"train.batch_size",
       {[](RunConfig& c, const std::string& v) {
          c.train.batch_size = ParseIntValue<std::size_t>("train.batch_size", v);
        },
        [](const RunConfig& c) { return std::to_string(c.train.batch_size); }}},
      {"train.peak_lr",
       {[](RunConfig& c, const std::string& v) {
          c.train.peak_lr = ParseDoubleValue("train.peak_lr", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.train.peak_lr); }}},
      {"train.init_sigma",
       {[](RunConfig& c, const std::string& v) {
          c.train.init_sigma = ParseDoubleValue("train.init_sigma", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.train.init_sigma); }}},
      {"train.adam_beta1",
       {[](RunConfig& c, const std::string& v) {
          c.train.adam.beta1 = ParseDoubleValue("train.adam_beta1", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.train.adam.beta1); }}},
      {"train.adam_beta2",
       {[](RunConfig& c, const std::string& v) {
          c.train.adam.beta2 = ParseDoubleValue("train.adam_beta2", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.train.adam.beta2); }}},
      {"train.adam_epsilon",
       {[](RunConfig& c, const std::string& v) {
          c.train.adam.epsilon = ParseDoubleValue("train.adam_epsilon", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.train.adam.epsilon); }}},
      {"train.gradient",
       {[](RunConfig& c, const std::string& v) {
          c.train.gradient = ParseGradientMode("train.gradient", v);
        },
        [](const RunConfig& c) { return GradientModeName(c.train.gradient); }}},
      {"unlearn.alpha",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.alpha = ParseDoubleValue("unlearn.alpha", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.unlearn.alpha); }}},
      {"unlearn.lambda",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.lambda = ParseDoubleValue("unlearn.lambda", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.unlearn.lambda); }}},
      {"unlearn.beta",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.beta = ParseDoubleValue("unlearn.beta", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.unlearn.beta); }}},
      {"unlearn.steps",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.steps = ParseIntValue<int>("unlearn.steps", v);
        },
        [](const RunConfig& c) { return std::to_string(c.unlearn.steps); }}},
      {"unlearn.lr",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.lr = ParseDoubleValue("unlearn.lr", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.unlearn.lr); }}},
      {"unlearn.forget_batch",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.forget_batch =
              ParseIntValue<std::size_t>("unlearn.forget_batch", v);
        },
        [](const RunConfig& c) {
          return std::to_string(c.unlearn.forget_batch);
        }}},
      {"unlearn.anchor_batch",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.anchor_batch =
              ParseIntValue<std::size_t>("unlearn.anchor_batch", v);
        },
        [](const RunConfig& c) {
          return std::to_string(c.unlearn.anchor_batch);
        }}},
      {"unlearn.calibration_fraction",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.calibration_fraction =
              ParseDoubleValue("unlearn.calibration_fraction", v);
        },
        [](const RunConfig& c) {
          return FormatDouble(c.unlearn.calibration_fraction);
        }}},
      {"unlearn.anchor_fraction",
       {[](RunConfig& c, const std::string& v) {
          c.anchor_fraction = ParseDoubleValue("unlearn.anchor_fraction", v);
        },
        [](const RunConfig& c) { return FormatDouble(c.anchor_fraction); }}},
      {"unlearn.target",
       {[](RunConfig& c, const std::string& v) {
          if (v == "similarity") {
            c.unlearn.target = TargetSource::kSimilarityGuided;
          } else if (v == "uniform") {
            c.unlearn.target = TargetSource::kUniform;
          } else {
            throw ConfigError("target must be similarity or uniform, got '" +
                              v + "'");
          }
        },
        [](const RunConfig& c) {
          return std::string(TargetSourceName(c.unlearn.target));
        }}},
      {"unlearn.gradient",
       {[](RunConfig& c, const std::string& v) {
          c.unlearn.gradient = ParseGradientMode("unlearn.gradient", v);
        },
        [](const RunConfig& c) { return GradientModeName(c.unlearn.gradient); }}},
      {"forget_class",
       {[](RunConfig& c, const std::string& v) {
          if (v.empty() || v == "none") {
            c.forget_class.reset();
          } else {
            c.forget_class = ParseIntValue<int>("forget_class", v);
          }
        },
        [](const RunConfig& c) {
          return c.forget_class ? std::to_string(*c.forget_class)
                                : std::string("none");
        }}},
      {"eval.kl_direction",
       {[](RunConfig& c, const std::string& v) {
          if (v == "gold_to_unlearned") {
            c.kl_direction = KlDirection::kGoldToUnlearned;
          } else if (v == "unlearned_to_gold") {
            c.kl_direction = KlDirection::kUnlearnedToGold;
          } else {
            throw ConfigError(
                "kl direction must be gold_to_unlearned or unlearned_to_gold");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.kl_direction == KlDirection::kGoldToUnlearned
                                 ? "gold_to_unlearned"
                                 : "unlearned_to_gold");
        }}},
      {"out_dir",
       {[](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir.string(); }}},
      {"checkpoint.original",
       {[](RunConfig& c, const std::string& v) { c.original_checkpoint = v; },
        [](const RunConfig& c) { return c.original_checkpoint.string(); }}},
      {"checkpoint.gold",
       {[](RunConfig& c, const std::string& v) { c.gold_checkpoint = v; },
        [](const RunConfig& c) { return c.gold_checkpoint.string(); }}},
      {"checkpoint.unlearned",
       {[](RunConfig& c, const std::string& v) { c.unlearned_checkpoint = v; },
        [](const RunConfig& c) { return c.unlearned_checkpoint.string(); }}},
  };
  return *keys;
}

std::string Hex64(std::uint64_t value) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << value;
  return out.str();
}

nlohmann::json Manifest(const RunConfig& config, const std::string& stage,
                        const SplitPartition& partition) {
  const ConfigMap flat = ConfigToMap(config);
  const nlohmann::json flat_json(flat);
  nlohmann::json j;
  j["stage"] = stage;
  j["config"] = flat_json;
  j["config_hash"] = Hex64(Fnv1a64(flat_json.dump()));
  j["partition"] = PartitionToJson(partition);
  return j;
}

int RequireForgetClass(const RunConfig& config, const char* command) {
  if (!config.forget_class) {
    throw ConfigError(std::string(command) + " requires --forget-class");
  }
  return *config.forget_class;
}

Checkpoint LoadNamedCheckpoint(const fs::path& path, const char* which) {
  if (!fs::exists(path)) {
    throw IoError(std::string(which) + " checkpoint not found: '" +
                  path.string() + "'");
  }
  return LoadCheckpoint(path);
}

std::string ObjectiveCsv(const UnlearnResult& result) {
  std::ostringstream out;
  out.precision(17);
  out << "step,objective\n";
  for (std::size_t i = 0; i < result.objective_history.size(); ++i) {
    out << i << ',' << result.objective_history[i] << '\n';
  }
  return out.str();
}

// Partition, unlearn and write the unlearned checkpoint plus manifest.
UnlearnResult UnlearnAndSave(const RunConfig& config,
                             const PreparedData& prepared,
                             const ParamVector& w_orig) {
  const int f = RequireForgetClass(config, "unlearn");
  const SplitPartition partition = PartitionForgetAnchor(
      prepared.partition, prepared.data, f, config.anchor_fraction,
      config.data.seed);
  const CircuitSpec spec = BuildCircuitSpec();
  UnlearnResult result =
      Unlearn(spec, prepared.data, partition, w_orig, config.unlearn);

  Checkpoint ckpt;
  ckpt.params = result.params;
  ckpt.dataset = DatasetName(config.data.kind);
  ckpt.seed = config.data.seed;
  ckpt.stage = "unlearned";
  SaveCheckpoint(ckpt, config.UnlearnedPath());

  nlohmann::json manifest = Manifest(config, "unlearned", partition);
  manifest["unlearn"] = UnlearnConfigToJson(config.unlearn);
  manifest["target"] = ForgetTargetToJson(result.target);
  manifest["anchor_fraction"] = config.anchor_fraction;
  manifest["param_delta"] = ParamDeltaToJson(
      SummarizeParamDelta(result.params.span(), w_orig.span()));
  WriteJsonFile(manifest, config.out_dir / "manifest_unlearn.json");
  WriteTextFile(ObjectiveCsv(result), config.out_dir / "objective_unlearn.csv");
  return result;
}

TrainOutcome TrainAndSave(const RunConfig& config, bool gold) {
  ValidateRunConfig(config);
  TrainOutcome out;
  out.prepared = Prepare(config.data);
  const CircuitSpec spec = BuildCircuitSpec();
  SplitPartition partition = out.prepared.partition;
  if (gold) {
    const int f = RequireForgetClass(config, "gold");
    partition = PartitionForgetAnchor(partition, out.prepared.data, f);
    out.model = TrainGold(spec, out.prepared.data, partition, config.train);
  } else {
    out.model = Train(spec, out.prepared.data, partition, config.train);
  }
  const std::string stage = gold ? "gold" : "original";

  Checkpoint ckpt;
  ckpt.params = out.model.params;
  ckpt.dataset = DatasetName(config.data.kind);
  ckpt.seed = config.data.seed;
  ckpt.stage = stage;
  SaveCheckpoint(ckpt, gold ? config.GoldPath() : config.OriginalPath());
  WriteTextFile(HistoryCsv(out.model),
                config.out_dir / ("history_" + stage + ".csv"));

  nlohmann::json manifest = Manifest(config, stage, partition);
  manifest["train"] = TrainConfigToJson(config.train);
  manifest["best_iteration"] = out.model.best_iteration;
  manifest["best_val_loss"] =
      out.model.history[static_cast<std::size_t>(out.model.best_iteration)]
          .val_loss;
  WriteJsonFile(manifest, config.out_dir / ("manifest_" + stage + ".json"));
  WriteJsonFile(PartitionToJson(out.prepared.partition),
                config.out_dir / "partition.json");
  return out;
}

std::string SweepCsv(SweepAxis axis, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << SweepAxisName(axis)
      << ",forget_class,test_acc_before,test_acc_after,retained_acc_before,"
         "retained_acc_after,p_f_before,p_f_after\n";
  for (const SweepRow& r : rows) {
    out << r.setting << ',' << r.forget_class << ',' << r.test_acc_before
        << ',' << r.test_acc_after << ',' << r.retained_acc_before << ','
        << r.retained_acc_after << ',' << r.p_f_before << ',' << r.p_f_after
        << '\n';
  }
  return out.str();
}

}  // namespace

fs::path RunConfig::OriginalPath() const {
  return original_checkpoint.empty() ? out_dir / "original.ckpt.json"
                                     : original_checkpoint;
}

fs::path RunConfig::GoldPath() const {
  return gold_checkpoint.empty() ? out_dir / "gold.ckpt.json" : gold_checkpoint;
}

fs::path RunConfig::UnlearnedPath() const {
  return unlearned_checkpoint.empty() ? out_dir / "unlearned.ckpt.json"
                                      : unlearned_checkpoint;
}

RunConfig DefaultRunConfig(DatasetKind kind) {
  RunConfig config;
  config.data = DefaultDataConfig(kind);
  return config;
}

void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value) {
  const auto it = Keys().find(key);
  if (it == Keys().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(config, value);
}

void ApplyConfigMap(RunConfig& config, const ConfigMap& values) {
  // The dataset resets dataset-dependent defaults, so it goes first.
  if (const auto it = values.find("dataset"); it != values.end()) {
    SetConfigValue(config, it->first, it->second);
  }
  for (const auto& [key, value] : values) {
    if (key != "dataset") SetConfigValue(config, key, value);
  }
}

ConfigMap ConfigToMap(const RunConfig& config) {
  ConfigMap out;
  for (const auto& [key, spec] : Keys()) out[key] = spec.get(config);
  return out;
}

ConfigMap LoadConfigFile(const fs::path& path) {
  if (!fs::exists(path)) {
    throw IoError("config file not found: '" + path.string() + "'");
  }
  nlohmann::json j = ReadJsonFile(path);
  if (j.contains("config") && j["config"].is_object()) j = j["config"];
  if (!j.is_object()) {
    throw ConfigError("config file '" + path.string() +
                      "' must hold a JSON object");
  }
  ConfigMap out;
  for (const auto& [key, value] : j.items()) {
    if (value.is_string()) {
      out[key] = value.get<std::string>();
    } else if (value.is_number_float()) {
      out[key] = FormatDouble(value.get<double>());
    } else if (value.is_number() || value.is_boolean()) {
      out[key] = value.dump();
    } else if (value.is_null()) {
      out[key] = "none";
    } else {
      throw ConfigError("config key '" + key + "' must be a scalar");
    }
  }
  return out;
}

void ValidateRunConfig(const RunConfig& config) {
  config.train.Validate();
  config.unlearn.Validate();
  if (config.forget_class &&
      (*config.forget_class < 0 || *config.forget_class >= kNumClasses)) {
    throw ConfigError("forget class must be 0, 1 or 2");
  }
  if (!(config.anchor_fraction > 0.0 && config.anchor_fraction <= 1.0)) {
    throw ConfigError("anchor fraction must be in (0, 1]");
  }
  if (!fs::exists(config.data.path)) {
    throw IoError("data file not found: '" + config.data.path.string() + "'");
  }
}

TrainOutcome CmdTrain(const RunConfig& config) {
  return TrainAndSave(config, false);
}

TrainOutcome CmdGold(const RunConfig& config) {
  RequireForgetClass(config, "gold");
  return TrainAndSave(config, true);
}

UnlearnResult CmdUnlearn(const RunConfig& config) {
  RequireForgetClass(config, "unlearn");
  ValidateRunConfig(config);
  const Checkpoint original =
      LoadNamedCheckpoint(config.OriginalPath(), "original");
  const PreparedData prepared = Prepare(config.data);
  return UnlearnAndSave(config, prepared, original.params);
}

EvalReport CmdEval(const RunConfig& config) {
  const int f = RequireForgetClass(config, "eval");
  ValidateRunConfig(config);
  const Checkpoint original =
      LoadNamedCheckpoint(config.OriginalPath(), "original");
  const Checkpoint unlearned =
      LoadNamedCheckpoint(config.UnlearnedPath(), "unlearned");
  std::optional<Checkpoint> gold;
  if (!config.gold_checkpoint.empty() || fs::exists(config.GoldPath())) {
    gold = LoadNamedCheckpoint(config.GoldPath(), "gold");
  }

  const PreparedData prepared = Prepare(config.data);
  const CircuitSpec spec = BuildCircuitSpec();
  const Indices& test = prepared.partition.test;

  EvalReport report;
  report.dataset = DatasetName(config.data.kind);
  report.forget_class = f;
  report.original = EvaluateModel(spec, original.params.span(), prepared.data,
                                  test, f, "original");
  report.unlearned = EvaluateModel(spec, unlearned.params.span(), prepared.data,
                                   test, f, "unlearned");
  report.delta =
      SummarizeParamDelta(unlearned.params.span(), original.params.span());
  if (gold) {
    report.gold =
        EvaluateModel(spec, gold->params.span(), prepared.data, test, f, "gold");
    std::vector<int> retained_labels;
    for (int k = 0; k < kNumClasses; ++k) {
      if (k != f) retained_labels.push_back(k);
    }
    const Indices retained_rows = FilterByLabel(prepared.data, test, f, false);
    report.kl = KlToGold(spec, gold->params.span(), unlearned.params.span(),
                         prepared.data, retained_rows, retained_labels, f,
                         config.kl_direction);
  }

  nlohmann::json j = EvalReportToJson(report);
  j["config"] = ConfigToMap(config);
  WriteJsonFile(j, config.out_dir / "report.json");
  WriteTextFile(FormatEvalReport(report), config.out_dir / "report.txt");
  WriteTextFile(ConfusionCsv(report.original.confusion),
                config.out_dir / "confusion_original.csv");
  WriteTextFile(ConfusionCsv(report.unlearned.confusion),
                config.out_dir / "confusion_unlearned.csv");
  if (report.gold) {
    WriteTextFile(ConfusionCsv(report.gold->confusion),
                  config.out_dir / "confusion_gold.csv");
  }
  return report;
}

SweepAxis ParseSweepAxis(const std::string& name) {
  if (name == "beta") return SweepAxis::kBeta;
  if (name == "alpha") return SweepAxis::kAlpha;
  if (name == "lambda") return SweepAxis::kLambda;
  if (name == "anchor_fraction") return SweepAxis::kAnchorFraction;
  if (name == "classwise") return SweepAxis::kClasswise;
  throw ConfigError("unknown sweep axis '" + name +
                    "' (beta, alpha, lambda, anchor_fraction, classwise)");
}

std::string SweepAxisName(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kBeta:
      return "beta";
    case SweepAxis::kAlpha:
      return "alpha";
    case SweepAxis::kLambda:
      return "lambda";
    case SweepAxis::kAnchorFraction:
      return "anchor_fraction";
    case SweepAxis::kClasswise:
      return "classwise";
  }
  return "unknown";
}

std::vector<double> DefaultSweepValues(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kBeta:
      return {0.25, 0.5, 0.75, 1.0};
    case SweepAxis::kAlpha:
      return {0.0, 1.0, 2.0};
    case SweepAxis::kLambda:
      return {0.0, 0.01, 0.1};
    case SweepAxis::kAnchorFraction:
      return {0.1, 0.25, 0.5, 1.0};
    case SweepAxis::kClasswise:
      return {0.0, 1.0};
  }
  return {};
}

std::vector<SweepRow> CmdAblate(const RunConfig& config, SweepAxis axis,
                                std::vector<double> values) {
  ValidateRunConfig(config);
  if (values.empty()) values = DefaultSweepValues(axis);

  RunConfig base = config;
  // Class 2 is the headline forgetting case; sweeps default to class 0.
  if (!base.forget_class) base.forget_class = 0;
  const fs::path original_path = base.OriginalPath();
  PreparedData prepared;
  ParamVector w_orig;
  if (fs::exists(original_path)) {
    w_orig = LoadCheckpoint(original_path).params;
    prepared = Prepare(base.data);
  } else {
    TrainOutcome trained = CmdTrain(base);
    w_orig = trained.model.params;
    prepared = std::move(trained.prepared);
  }

  const CircuitSpec spec = BuildCircuitSpec();
  const fs::path sweep_dir = base.out_dir / ("sweep_" + SweepAxisName(axis));
  std::vector<SweepRow> rows;
  for (double value : values) {
    RunConfig run = base;
    run.original_checkpoint = original_path;
    run.unlearned_checkpoint.clear();
    switch (axis) {
      case SweepAxis::kBeta:
        run.unlearn.beta = value;
        break;
      case SweepAxis::kAlpha:
        run.unlearn.alpha = value;
        break;
      case SweepAxis::kLambda:
        run.unlearn.lambda = value;
        break;
      case SweepAxis::kAnchorFraction:
        run.anchor_fraction = value;
        break;
      case SweepAxis::kClasswise:
        run.forget_class = static_cast<int>(std::lround(value));
        break;
    }
    ValidateRunConfig(run);
    run.out_dir = sweep_dir / (SweepAxisName(axis) + "=" + FormatDouble(value));
    const UnlearnResult result = UnlearnAndSave(run, prepared, w_orig);

    const int f = *run.forget_class;
    const ModelEval before = EvaluateModel(
        spec, w_orig.span(), prepared.data, prepared.partition.test, f, "original");
    const ModelEval after =
        EvaluateModel(spec, result.params.span(), prepared.data,
                      prepared.partition.test, f, "unlearned");
    SweepRow row;
    row.setting = value;
    row.forget_class = f;
    row.test_acc_before = before.accuracy;
    row.test_acc_after = after.accuracy;
    row.retained_acc_before = before.retained_accuracy;
    row.retained_acc_after = after.retained_accuracy;
    row.p_f_before = before.forget_prob;
    row.p_f_after = after.forget_prob;
    rows.push_back(row);
  }

  nlohmann::json j;
  j["axis"] = SweepAxisName(axis);
  j["config"] = ConfigToMap(base);
  j["rows"] = nlohmann::json::array();
  for (const SweepRow& r : rows) {
    j["rows"].push_back({{"setting", r.setting},
                         {"forget_class", r.forget_class},
                         {"test_acc_before", r.test_acc_before},
                         {"test_acc_after", r.test_acc_after},
                         {"retained_acc_before", r.retained_acc_before},
                         {"retained_acc_after", r.retained_acc_after},
                         {"p_f_before", r.p_f_before},
                         {"p_f_after", r.p_f_after}});
  }
  WriteJsonFile(j, base.out_dir / ("sweep_" + SweepAxisName(axis) + ".json"));
  WriteTextFile(SweepCsv(axis, rows),
                base.out_dir / ("sweep_" + SweepAxisName(axis) + ".csv"));
  return rows;
}

}  // namespace qmu
