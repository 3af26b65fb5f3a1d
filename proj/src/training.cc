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

#include "qmu/training.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qmu/errors.h"

namespace qmu {

void TrainConfig::Validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (!(peak_lr > 0.0) || !std::isfinite(peak_lr)) {
    throw ConfigError("peak learning rate must be positive");
  }
  if (!(init_sigma >= 0.0)) throw ConfigError("init sigma must be >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    throw ConfigError("invalid Adam hyperparameters");
  }
}

double CrossEntropyFromProbs(std::span<const ProbDist> probs,
                             std::span<const int> labels) {
  if (probs.empty()) throw std::invalid_argument("empty batch");
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("probability / label count mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i].probs.at(static_cast<std::size_t>(labels[i]));
    total -= std::log(std::max(p, kProbFloor));
  }
  return total / static_cast<double>(probs.size());
}

double CrossEntropyLoss(const CircuitSpec& spec, std::span<const double> params,
                        const Dataset& data,
                        std::span<const std::size_t> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  double total = 0.0;
  for (std::size_t i : batch) {
    const ProbDist p = PredictProba(spec, params, data.row(i));
    total -= std::log(
        std::max(p.probs[static_cast<std::size_t>(data.y[i])], kProbFloor));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> ParameterShiftGradient(const ScalarObjective& f,
                                           std::span<const double> params) {
  std::vector<double> shifted(params.begin(), params.end());
  std::vector<double> grad(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    shifted[i] = params[i] + kShift;
    const double plus = f(shifted);
    shifted[i] = params[i] - kShift;
    const double minus = f(shifted);
    shifted[i] = params[i];
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericError("objective is not finite at shift index " +
                         std::to_string(i));
    }
    grad[i] = (plus - minus) / 2.0;
  }
  return grad;
}

LogitJacobian ComputeLogitJacobian(const CircuitSpec& spec,
                                   std::span<const double> params,
                                   std::span<const double> features) {
  LogitJacobian jac(params.size());
  std::vector<double> shifted(params.begin(), params.end());
  for (std::size_t i = 0; i < params.size(); ++i) {
    shifted[i] = params[i] + kShift;
    const Logits plus = Forward(spec, shifted, features);
    shifted[i] = params[i] - kShift;
    const Logits minus = Forward(spec, shifted, features);
    shifted[i] = params[i];
    for (int k = 0; k < kNumClasses; ++k) {
      jac[i][k] = (plus[k] - minus[k]) / 2.0;
    }
  }
  return jac;
}

std::vector<double> ExactCrossEntropyGradient(
    const CircuitSpec& spec, std::span<const double> params,
    const Dataset& data, std::span<const std::size_t> batch) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  std::vector<double> grad(params.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (std::size_t s : batch) {
    const ProbDist p = PredictProba(spec, params, data.row(s));
    const LogitJacobian jac = ComputeLogitJacobian(spec, params, data.row(s));
    for (std::size_t i = 0; i < params.size(); ++i) {
      double g = 0.0;
      for (int k = 0; k < kNumClasses; ++k) {
        const double dloss_dlogit = p.probs[k] - (k == data.y[s] ? 1.0 : 0.0);
        g += dloss_dlogit * jac[i][k];
      }
      grad[i] += scale * g;
    }
  }
  return grad;
}

double CosineLr(int iter, int total_iters, double peak_lr) {
  return peak_lr * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(iter) /
                         static_cast<double>(total_iters)));
}

AdamOptimizer::AdamOptimizer(std::size_t n, AdamConfig config)
    : config_(config), m_(n, 0.0), v_(n, 0.0) {}

void AdamOptimizer::Step(std::span<double> params, std::span<const double> grad,
                         double lr) {
  Update(params, grad, lr, -1.0);
}

void AdamOptimizer::Ascend(std::span<double> params,
                           std::span<const double> grad, double lr) {
  Update(params, grad, lr, 1.0);
}

void AdamOptimizer::Update(std::span<double> params,
                           std::span<const double> grad, double lr,
                           double direction) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw std::invalid_argument("Adam state / parameter length mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, t_);
  const double bc2 = 1.0 - std::pow(config_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] += direction * lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
  }
}

ParamVector InitParams(double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  ParamVector params;
  if (sigma > 0.0) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] = normal(rng);
  }
  return params;
}

TrainedModel Train(const CircuitSpec& spec, const Dataset& data,
                   const SplitPartition& partition, const TrainConfig& config) {
  config.Validate();
  if (partition.train.empty()) throw ConfigError("training set is empty");
  if (partition.val.empty()) throw ConfigError("validation set is empty");

  // Separate streams for initialization and batch order.
  ParamVector params = InitParams(config.init_sigma, config.seed);
  std::mt19937_64 batch_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Indices pool = partition.train;
  std::shuffle(pool.begin(), pool.end(), batch_rng);
  const std::size_t batch_size = std::min(config.batch_size, pool.size());
  std::size_t cursor = 0;

  AdamOptimizer adam(params.size(), config.adam);
  TrainedModel out;
  out.config = config;
  out.history.reserve(static_cast<std::size_t>(config.iterations));
  double best_val = std::numeric_limits<double>::infinity();

  for (int it = 0; it < config.iterations; ++it) {
    if (cursor + batch_size > pool.size()) {
      std::shuffle(pool.begin(), pool.end(), batch_rng);
      cursor = 0;
    }
    const std::span<const std::size_t> batch(pool.data() + cursor, batch_size);
    cursor += batch_size;

    auto loss = [&](std::span<const double> w) {
      return CrossEntropyLoss(spec, w, data, batch);
    };
    HistoryEntry entry;
    entry.train_loss = loss(params.span());
    const std::vector<double> grad =
        config.gradient == GradientMode::kShiftRule
            ? ParameterShiftGradient(loss, params.span())
            : ExactCrossEntropyGradient(spec, params.span(), data, batch);
    entry.lr = CosineLr(it, config.iterations, config.peak_lr);
    adam.Step(params.span(), grad, entry.lr);
    entry.val_loss = CrossEntropyLoss(spec, params.span(), data, partition.val);
    if (!std::isfinite(entry.val_loss)) {
      throw NumericError("validation loss is not finite at iteration " +
                         std::to_string(it));
    }
    out.history.push_back(entry);
    if (entry.val_loss < best_val) {
      best_val = entry.val_loss;
      out.params = params;
      out.best_iteration = it;
    }
  }
  return out;
}

TrainedModel TrainGold(const CircuitSpec& spec, const Dataset& data,
                       const SplitPartition& partition,
                       const TrainConfig& config) {
  if (!partition.forget_class) {
    throw ConfigError("gold retraining requires a forget class");
  }
  const SplitPartition retained =
      WithoutClass(partition, data, *partition.forget_class);
  return Train(spec, data, retained, config);
}

std::string HistoryCsv(const TrainedModel& model) {
  std::ostringstream out;
  out.precision(17);
  out << "iteration,train_loss,val_loss,lr\n";
  for (std::size_t i = 0; i < model.history.size(); ++i) {
    const HistoryEntry& h = model.history[i];
    out << i << ',' << h.train_loss << ',' << h.val_loss << ',' << h.lr
        << '\n';
  }
  return out.str();
}

nlohmann::json TrainConfigToJson(const TrainConfig& config) {
  return {{"iterations", config.iterations},
          {"batch_size", config.batch_size},
          {"peak_lr", config.peak_lr},
          {"adam_beta1", config.adam.beta1},
          {"adam_beta2", config.adam.beta2},
          {"adam_epsilon", config.adam.epsilon},
          {"init_sigma", config.init_sigma},
          {"seed", config.seed},
          {"gradient", config.gradient == GradientMode::kShiftRule
                           ? "shift_rule"
                           : "exact"}};
}

}  // namespace qmu
