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

#ifndef QMU_TRAINING_H_
#define QMU_TRAINING_H_

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qmu/circuit.h"
#include "qmu/data.h"

namespace qmu {

inline constexpr double kProbFloor = 1e-12;
inline constexpr double kShift = 1.5707963267948966;  // pi / 2

// How parameter gradients are obtained.
//   kShiftRule: the +-pi/2 two-point rule applied directly to the scalar
//               objective (what the training recipe prescribes).
//   kExact:     the two-point rule applied per logit, where it is exact,
//               chained through the analytic softmax / log-loss Jacobian.
enum class GradientMode { kShiftRule, kExact };

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int iterations = 300;
  std::size_t batch_size = 10;
  double peak_lr = 0.1;
  AdamConfig adam;
  double init_sigma = 0.01;
  std::uint64_t seed = 0;
  GradientMode gradient = GradientMode::kShiftRule;

  // Throws ConfigError on violated invariants.
  void Validate() const;
};

struct HistoryEntry {
  double train_loss = 0.0;  // mini-batch loss before the update
  double val_loss = 0.0;    // full validation loss after the update
  double lr = 0.0;
};

struct TrainedModel {
  ParamVector params;  // parameters after iteration `best_iteration`
  std::vector<HistoryEntry> history;
  TrainConfig config;
  int best_iteration = 0;
};

// Mean of -log(max(p_i[y_i], kProbFloor)). Throws std::invalid_argument on
// an empty batch or mismatched lengths.
double CrossEntropyFromProbs(std::span<const ProbDist> probs,
                             std::span<const int> labels);

double CrossEntropyLoss(const CircuitSpec& spec, std::span<const double> params,
                        const Dataset& data, std::span<const std::size_t> batch);

using ScalarObjective = std::function<double(std::span<const double>)>;

// g_i = (f(w + pi/2 e_i) - f(w - pi/2 e_i)) / 2 for every coordinate, with
// coordinates visited in index order. Throws NumericError naming the index
// if f is non-finite at a shifted point.
std::vector<double> ParameterShiftGradient(const ScalarObjective& f,
                                           std::span<const double> params);

// d logit_k / d w_i for one input, via the per-logit shift rule.
using LogitJacobian = std::vector<std::array<double, kNumClasses>>;
LogitJacobian ComputeLogitJacobian(const CircuitSpec& spec,
                                   std::span<const double> params,
                                   std::span<const double> features);

// Gradient of CrossEntropyLoss via the per-logit rule (GradientMode::kExact).
std::vector<double> ExactCrossEntropyGradient(
    const CircuitSpec& spec, std::span<const double> params,
    const Dataset& data, std::span<const std::size_t> batch);

// peak_lr * (1 + cos(pi * iter / total_iters)) / 2.
double CosineLr(int iter, int total_iters, double peak_lr);

// Bias-corrected Adam. Step() descends; Ascend() climbs.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t n, AdamConfig config = {});

  void Step(std::span<double> params, std::span<const double> grad, double lr);
  void Ascend(std::span<double> params, std::span<const double> grad,
              double lr);

  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  int step_count() const { return t_; }

 private:
  void Update(std::span<double> params, std::span<const double> grad,
              double lr, double direction);

  AdamConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

// Independent N(0, sigma^2) draws, seeded.
ParamVector InitParams(double sigma, std::uint64_t seed);

// Mini-batch training with best-validation selection. Batches are drawn
// without replacement within an epoch; the pool is reshuffled when fewer
// than batch_size rows remain.
TrainedModel Train(const CircuitSpec& spec, const Dataset& data,
                   const SplitPartition& partition, const TrainConfig& config);

// Same as Train on the partition with every forgotten-class row removed from
// train and val. Requires partition.forget_class.
TrainedModel TrainGold(const CircuitSpec& spec, const Dataset& data,
                       const SplitPartition& partition,
                       const TrainConfig& config);

// "iteration,train_loss,val_loss,lr" rows.
std::string HistoryCsv(const TrainedModel& model);

nlohmann::json TrainConfigToJson(const TrainConfig& config);

}  // namespace qmu

#endif  // QMU_TRAINING_H_
