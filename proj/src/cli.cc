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

#include <iomanip>
#include <ostream>
#include <utility>

#include <CLI11.hpp>

#include "qmu/errors.h"
#include "qmu/pipeline.h"

namespace qmu {
namespace {

// Flag name -> config key. Every subcommand accepts all of them.
const std::vector<std::pair<std::string, std::string>>& FlagKeys() {
  static const auto* flags = new std::vector<std::pair<std::string, std::string>>{
      {"--dataset", "dataset"},
      {"--data", "data.path"},
      {"--seed", "seed"},
      {"--out-dir", "out_dir"},
      {"--forget-class", "forget_class"},
      {"--split-train", "split.train"},
      {"--split-val", "split.val"},
      {"--split-test", "split.test"},
      {"--covertype-cap", "covertype.cap"},
      {"--iterations", "train.iterations"},
      {"--batch-size", "train.batch_size"},
      {"--peak-lr", "train.peak_lr"},
      {"--init-sigma", "train.init_sigma"},
      {"--train-gradient", "train.gradient"},
      {"--alpha", "unlearn.alpha"},
      {"--lambda", "unlearn.lambda"},
      {"--beta", "unlearn.beta"},
      {"--steps", "unlearn.steps"},
      {"--lr", "unlearn.lr"},
      {"--target", "unlearn.target"},
      {"--anchor-fraction", "unlearn.anchor_fraction"},
      {"--calibration-fraction", "unlearn.calibration_fraction"},
      {"--forget-batch", "unlearn.forget_batch"},
      {"--anchor-batch", "unlearn.anchor_batch"},
      {"--unlearn-gradient", "unlearn.gradient"},
      {"--kl-direction", "eval.kl_direction"},
      {"--original", "checkpoint.original"},
      {"--gold", "checkpoint.gold"},
      {"--unlearned", "checkpoint.unlearned"},
  };
  return *flags;
}

struct CommonOptions {
  std::map<std::string, std::string> values;  // by flag name
  std::vector<CLI::Option*> options;
  std::string config_path;
  bool header = false;
  std::vector<std::string> overrides;
};

void AddCommonOptions(CLI::App* cmd, CommonOptions& common) {
  for (const auto& [flag, key] : FlagKeys()) {
    common.options.push_back(
        cmd->add_option(flag, common.values[flag], "sets " + key));
  }
  cmd->add_option("--config", common.config_path,
                  "flat dotted-key JSON config or a run manifest");
  cmd->add_flag("--header", common.header, "data file has a header row");
  cmd->add_option("--set", common.overrides, "key=value override")
      ->allow_extra_args(false);
}

RunConfig ResolveConfig(const CommonOptions& common) {
  ConfigMap merged;
  if (!common.config_path.empty()) merged = LoadConfigFile(common.config_path);
  for (const std::string& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    merged[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const auto& flags = FlagKeys();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (common.options[i]->count() > 0) {
      merged[flags[i].second] = common.values.at(flags[i].first);
    }
  }
  if (common.header) merged["data.has_header"] = "true";

  RunConfig config;
  ApplyConfigMap(config, merged);
  return config;
}

std::vector<double> ParseValueList(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--values expects comma-separated numbers, got '" +
                        text + "'");
    }
  }
  return out;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Distribution-guided class unlearning for a six-qubit "
               "variational classifier"};
  app.require_subcommand(1);

  CommonOptions train_opts, gold_opts, unlearn_opts, eval_opts, ablate_opts;
  auto* train = app.add_subcommand("train", "train the original model");
  AddCommonOptions(train, train_opts);
  auto* gold = app.add_subcommand("gold", "retrain without the forget class");
  AddCommonOptions(gold, gold_opts);
  auto* unlearn = app.add_subcommand("unlearn", "unlearn the forget class");
  AddCommonOptions(unlearn, unlearn_opts);
  auto* eval = app.add_subcommand("eval", "evaluate original/unlearned/gold");
  AddCommonOptions(eval, eval_opts);
  auto* ablate = app.add_subcommand("ablate", "sweep one unlearning knob");
  AddCommonOptions(ablate, ablate_opts);
  std::string sweep;
  std::string values;
  ablate->add_option("--sweep", sweep,
                     "beta | alpha | lambda | anchor_fraction | classwise")
      ->required();
  ablate->add_option("--values", values, "comma-separated sweep values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    out << std::fixed << std::setprecision(4);
    if (train->parsed()) {
      const RunConfig config = ResolveConfig(train_opts);
      const TrainOutcome r = CmdTrain(config);
      out << "trained: best iteration " << r.model.best_iteration
          << ", checkpoint " << config.OriginalPath().string() << '\n';
    } else if (gold->parsed()) {
      const RunConfig config = ResolveConfig(gold_opts);
      const TrainOutcome r = CmdGold(config);
      out << "gold: best iteration " << r.model.best_iteration
          << ", checkpoint " << config.GoldPath().string() << '\n';
    } else if (unlearn->parsed()) {
      const RunConfig config = ResolveConfig(unlearn_opts);
      const UnlearnResult r = CmdUnlearn(config);
      out << "unlearned: target (";
      for (std::size_t k = 0; k < r.target.q.size(); ++k) {
        out << (k ? ", " : "") << r.target.q[k];
      }
      out << "), checkpoint " << config.UnlearnedPath().string() << '\n';
    } else if (eval->parsed()) {
      const RunConfig config = ResolveConfig(eval_opts);
      const EvalReport report = CmdEval(config);
      out << FormatEvalReport(report);
    } else if (ablate->parsed()) {
      const RunConfig config = ResolveConfig(ablate_opts);
      const SweepAxis axis = ParseSweepAxis(sweep);
      const auto rows = CmdAblate(config, axis, ParseValueList(values));
      out << std::setw(16) << SweepAxisName(axis) << std::setw(8) << "f"
          << std::setw(12) << "acc_before" << std::setw(12) << "acc_after"
          << std::setw(12) << "ret_after" << std::setw(12) << "p_f_after"
          << '\n';
      for (const SweepRow& r : rows) {
        out << std::setw(16) << r.setting << std::setw(8) << r.forget_class
            << std::setw(12) << r.test_acc_before << std::setw(12)
            << r.test_acc_after << std::setw(12) << r.retained_acc_after
            << std::setw(12) << r.p_f_after << '\n';
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUnknown;
  }
}

}  // namespace qmu
