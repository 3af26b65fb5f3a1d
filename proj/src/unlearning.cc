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

#include "qmu/unlearning.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qmu/errors.h"

namespace qmu {
namespace {

double FlooredLog(double p) { return std::log(std::max(p, kProbFloor)); }

// sum_k weights_k log p_k, skipping zero weights.
double CrossTerm(const ProbDist& weights, const ProbDist& p) {
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights.probs[k] == 0.0) continue;
    total += weights.probs[k] * FlooredLog(p.probs[k]);
  }
  return total;
}

double Kl(const ProbDist& p, const ProbDist& q) {
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.probs[k] == 0.0) continue;
    total += p.probs[k] * (std::log(p.probs[k]) - FlooredLog(q.probs[k]));
  }
  return total;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

void CheckProblem(const UnlearningProblem& problem) {
  if (!problem.spec || !problem.data || !problem.anchors) {
    throw std::invalid_argument("unlearning problem is incomplete");
  }
}

Indices AllPositions(std::size_t n) {
  Indices out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

struct ResolvedBatch {
  std::span<const std::size_t> forget;
  Indices anchor_storage;
  std::span<const std::size_t> anchor;
};

ResolvedBatch Resolve(const UnlearningProblem& problem,
                      const ObjectiveBatch& batch) {
  ResolvedBatch out;
  out.forget = batch.forget.empty() ? std::span<const std::size_t>(problem.forget)
                                    : batch.forget;
  if (batch.anchor_positions.empty()) {
    out.anchor_storage = AllPositions(problem.anchors->size());
    out.anchor = out.anchor_storage;
  } else {
    out.anchor = batch.anchor_positions;
  }
  return out;
}

double AnchorCrossTerm(const UnlearningProblem& problem,
                       std::span<const double> w,
                       std::span<const std::size_t> positions) {
  if (positions.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t pos : positions) {
    const std::size_t row = problem.anchors->indices.at(pos);
    const ProbDist p = PredictProba(*problem.spec, w, problem.data->row(row));
    total += CrossTerm(problem.anchors->refs[pos], p);
  }
  return total / static_cast<double>(positions.size());
}

double AnchorKl(const UnlearningProblem& problem, std::span<const double> w,
                std::span<const std::size_t> positions) {
  if (positions.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t pos : positions) {
    const std::size_t row = problem.anchors->indices.at(pos);
    const ProbDist p = PredictProba(*problem.spec, w, problem.data->row(row));
    total += Kl(problem.anchors->refs[pos], p);
  }
  return total / static_cast<double>(positions.size());
}

Indices SampleWithoutReplacement(const Indices& pool, std::size_t n,
                                 std::mt19937_64& rng) {
  Indices copy = pool;
  std::shuffle(copy.begin(), copy.end(), rng);
  copy.resize(std::min(n, copy.size()));
  return copy;
}

}  // namespace

ForgetTarget ForgetTargetFromMeans(std::span<const double> means,
                                   int forget_class, double beta) {
  const int k_count = static_cast<int>(means.size());
  if (forget_class < 0 || forget_class >= k_count) {
    throw std::invalid_argument("forget class out of range");
  }
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  ForgetTarget out;
  out.forget_class = forget_class;
  out.beta = beta;
  out.source = TargetSource::kSimilarityGuided;
  out.q.probs.assign(means.size(), 0.0);
  double total = 0.0;
  for (int k = 0; k < k_count; ++k) {
    if (k == forget_class) continue;
    out.q.probs[k] = std::pow(means[k], beta);
    total += out.q.probs[k];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NumericError("retained-class mean probabilities are all zero");
  }
  for (int k = 0; k < k_count; ++k) {
    if (k != forget_class) out.q.probs[k] /= total;
  }
  return out;
}

ForgetTarget ComputeForgetTarget(const CircuitSpec& spec,
                                 const ParamVector& w_orig, const Dataset& data,
                                 std::span<const std::size_t> calibration,
                                 int forget_class, double beta) {
  if (calibration.empty()) {
    throw std::invalid_argument("calibration set is empty");
  }
  std::vector<double> means(kNumClasses, 0.0);
  for (std::size_t row : calibration) {
    if (data.y.at(row) != forget_class) {
      throw std::invalid_argument("calibration row " + std::to_string(row) +
                                  " is not labelled with the forget class");
    }
    const ProbDist p = PredictProba(spec, w_orig, data.row(row));
    for (int k = 0; k < kNumClasses; ++k) means[k] += p.probs[k];
  }
  for (double& m : means) m /= static_cast<double>(calibration.size());
  return ForgetTargetFromMeans(means, forget_class, beta);
}

ForgetTarget UniformForgetTarget(int forget_class, int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("need at least 2 classes");
  if (forget_class < 0 || forget_class >= num_classes) {
    throw std::invalid_argument("forget class out of range");
  }
  ForgetTarget out;
  out.forget_class = forget_class;
  out.source = TargetSource::kUniform;
  out.q.probs.assign(static_cast<std::size_t>(num_classes),
                     1.0 / static_cast<double>(num_classes - 1));
  out.q.probs[static_cast<std::size_t>(forget_class)] = 0.0;
  return out;
}

AnchorRefs CacheAnchorRefs(const CircuitSpec& spec, const ParamVector& w_orig,
                           const Dataset& data,
                           std::span<const std::size_t> anchor) {
  if (anchor.empty()) throw std::invalid_argument("anchor set is empty");
  AnchorRefs out;
  out.indices.assign(anchor.begin(), anchor.end());
  out.refs.reserve(anchor.size());
  for (std::size_t row : anchor) {
    out.refs.push_back(PredictProba(spec, w_orig, data.row(row)));
  }
  return out;
}

double ForgetTerm(const UnlearningProblem& problem, std::span<const double> w,
                  std::span<const std::size_t> forget_rows) {
  CheckProblem(problem);
  if (forget_rows.empty()) throw std::invalid_argument("forget set is empty");
  double total = 0.0;
  for (std::size_t row : forget_rows) {
    const ProbDist p = PredictProba(*problem.spec, w, problem.data->row(row));
    total += CrossTerm(problem.target.q, p);
  }
  return total / static_cast<double>(forget_rows.size());
}

double Objective(const UnlearningProblem& problem, std::span<const double> w,
                 const ObjectiveBatch& batch) {
  CheckProblem(problem);
  const ResolvedBatch b = Resolve(problem, batch);
  return ForgetTerm(problem, w, b.forget) +
         problem.alpha * AnchorCrossTerm(problem, w, b.anchor) -
         problem.lambda * SquaredDistance(w, problem.w_orig.span());
}

double ObjectiveLagrangianForm(const UnlearningProblem& problem,
                               std::span<const double> w,
                               const ObjectiveBatch& batch) {
  CheckProblem(problem);
  const ResolvedBatch b = Resolve(problem, batch);
  return ForgetTerm(problem, w, b.forget) -
         problem.alpha * AnchorKl(problem, w, b.anchor) -
         problem.lambda * SquaredDistance(w, problem.w_orig.span());
}

std::vector<double> ExactObjectiveGradient(const UnlearningProblem& problem,
                                           std::span<const double> w,
                                           const ObjectiveBatch& batch) {
  CheckProblem(problem);
  const ResolvedBatch b = Resolve(problem, batch);
  std::vector<double> grad(w.size(), 0.0);

  // d/dlogit_j of sum_k t_k log softmax_k = t_j - p_j when sum_k t_k = 1.
  auto accumulate = [&](std::size_t row, const ProbDist& weights,
                        double scale) {
    const auto x = problem.data->row(row);
    const ProbDist p = PredictProba(*problem.spec, w, x);
    const LogitJacobian jac = ComputeLogitJacobian(*problem.spec, w, x);
    for (std::size_t i = 0; i < w.size(); ++i) {
      double g = 0.0;
      for (int k = 0; k < kNumClasses; ++k) {
        g += (weights.probs[k] - p.probs[k]) * jac[i][k];
      }
      grad[i] += scale * g;
    }
  };

  const double forget_scale = 1.0 / static_cast<double>(b.forget.size());
  for (std::size_t row : b.forget) {
    accumulate(row, problem.target.q, forget_scale);
  }
  if (!b.anchor.empty() && problem.alpha != 0.0) {
    const double anchor_scale =
        problem.alpha / static_cast<double>(b.anchor.size());
    for (std::size_t pos : b.anchor) {
      accumulate(problem.anchors->indices.at(pos), problem.anchors->refs[pos],
                 anchor_scale);
    }
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    grad[i] -= 2.0 * problem.lambda * (w[i] - problem.w_orig[i]);
  }
  return grad;
}

void UnlearnConfig::Validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("alpha must be >= 0");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be >= 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("beta must be > 0");
  }
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be > 0");
  if (!(calibration_fraction > 0.0 && calibration_fraction <= 1.0)) {
    throw ConfigError("calibration fraction must be in (0, 1]");
  }
}

UnlearnResult Unlearn(const CircuitSpec& spec, const Dataset& data,
                      const SplitPartition& partition,
                      const ParamVector& w_orig, const UnlearnConfig& config) {
  config.Validate();
  if (!partition.forget_class) {
    throw ConfigError("partition has no forget class");
  }
  if (partition.forget.empty()) throw ConfigError("forget set is empty");
  if (partition.anchor.empty()) throw ConfigError("anchor set is empty");
  const int f = *partition.forget_class;

  std::mt19937_64 rng(config.seed);
  Indices calibration = partition.forget;
  if (config.calibration_fraction < 1.0) {
    const auto n = static_cast<std::size_t>(std::max<long>(
        1, std::lround(config.calibration_fraction *
                       static_cast<double>(calibration.size()))));
    calibration = SampleWithoutReplacement(calibration, n, rng);
  }

  UnlearnResult out;
  out.w_orig = w_orig;
  out.target = config.target == TargetSource::kUniform
                   ? UniformForgetTarget(f, kNumClasses)
                   : ComputeForgetTarget(spec, w_orig, data, calibration, f,
                                         config.beta);
  out.target.beta = config.beta;

  const AnchorRefs anchors = CacheAnchorRefs(spec, w_orig, data, partition.anchor);
  UnlearningProblem problem;
  problem.spec = &spec;
  problem.data = &data;
  problem.forget = partition.forget;
  problem.target = out.target;
  problem.anchors = &anchors;
  problem.alpha = config.alpha;
  problem.lambda = config.lambda;
  problem.w_orig = w_orig;

  const Indices anchor_positions = AllPositions(anchors.size());
  ParamVector w = w_orig;
  AdamOptimizer adam(w.size(), config.adam);
  out.objective_history.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    Indices forget_batch;
    Indices anchor_batch;
    if (config.forget_batch > 0 && config.forget_batch < problem.forget.size()) {
      forget_batch =
          SampleWithoutReplacement(problem.forget, config.forget_batch, rng);
    }
    if (config.anchor_batch > 0 && config.anchor_batch < anchors.size()) {
      anchor_batch =
          SampleWithoutReplacement(anchor_positions, config.anchor_batch, rng);
    }
    const ObjectiveBatch batch{forget_batch, anchor_batch};
    auto objective = [&](std::span<const double> params) {
      return Objective(problem, params, batch);
    };
    const double value = objective(w.span());
    if (!std::isfinite(value)) {
      throw NumericError("objective is not finite at step " +
                         std::to_string(step));
    }
    out.objective_history.push_back(value);
    const std::vector<double> grad =
        config.gradient == GradientMode::kShiftRule
            ? ParameterShiftGradient(objective, w.span())
            : ExactObjectiveGradient(problem, w.span(), batch);
    adam.Ascend(w.span(), grad, config.lr);
  }

  out.params = w;
  out.param_delta.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.param_delta[i] = std::abs(w[i] - w_orig[i]);
  }
  return out;
}

const char* TargetSourceName(TargetSource source) {
  return source == TargetSource::kUniform ? "uniform" : "similarity";
}

nlohmann::json UnlearnConfigToJson(const UnlearnConfig& config) {
  return {{"alpha", config.alpha},
          {"lambda", config.lambda},
          {"beta", config.beta},
          {"steps", config.steps},
          {"lr", config.lr},
          {"forget_batch", config.forget_batch},
          {"anchor_batch", config.anchor_batch},
          {"calibration_fraction", config.calibration_fraction},
          {"seed", config.seed},
          {"target", TargetSourceName(config.target)},
          {"gradient", config.gradient == GradientMode::kShiftRule
                           ? "shift_rule"
                           : "exact"}};
}

nlohmann::json ForgetTargetToJson(const ForgetTarget& target) {
  return {{"q", target.q.probs},
          {"forget_class", target.forget_class},
          {"beta", target.beta},
          {"source", TargetSourceName(target.source)}};
}

}  // namespace qmu
