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

// Class-level unlearning of a trained classifier.
//
// Given the original parameters w0, a forget set F (training rows of class f)
// and an anchor set A (retained training rows), the unlearned parameters
// maximise
//
//   J(w) = mean_{x in F} sum_k q_k log p_w(k|x)
//        + alpha * mean_{x in A} sum_k p_w0(k|x) log p_w(k|x)
//        - lambda * |w - w0|^2
//
// where q is a fixed target with q_f = 0. The similarity-guided target puts
// q_k proportional to (mean_{x in S} p_w0(k|x))^beta over k != f, S a subset
// of F; the uniform target spreads mass evenly over k != f.
//
// Because sum_k p_ref log p_w = -KL(p_ref || p_w) + sum_k p_ref log p_ref,
// J and the KL-penalised form
//
//   J_L(w) = L_F(w) - alpha * mean_{x in A} KL(p_w0(.|x) || p_w(.|x))
//          - lambda * |w - w0|^2
//
// differ by a constant that does not depend on w.

#ifndef QMU_UNLEARNING_H_
#define QMU_UNLEARNING_H_

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "qmu/circuit.h"
#include "qmu/data.h"
#include "qmu/training.h"

namespace qmu {

enum class TargetSource { kSimilarityGuided, kUniform };

struct ForgetTarget {
  ProbDist q;  // q[forget_class] == 0 exactly
  int forget_class = 0;
  double beta = 1.0;
  TargetSource source = TargetSource::kSimilarityGuided;
};

// Similarity-guided target from per-class mean probabilities; means[f] is
// ignored. Throws NumericError if every retained mean is zero.
ForgetTarget ForgetTargetFromMeans(std::span<const double> means,
                                   int forget_class, double beta);

// Means of p_w0(k|x) over `calibration` (all labelled f), then
// ForgetTargetFromMeans.
ForgetTarget ComputeForgetTarget(const CircuitSpec& spec,
                                 const ParamVector& w_orig, const Dataset& data,
                                 std::span<const std::size_t> calibration,
                                 int forget_class, double beta);

ForgetTarget UniformForgetTarget(int forget_class, int num_classes);

// Reference distributions under the original parameters, computed once.
struct AnchorRefs {
  Indices indices;             // anchor rows
  std::vector<ProbDist> refs;  // refs[i] = p_w0(.|row indices[i])

  std::size_t size() const { return indices.size(); }
};

AnchorRefs CacheAnchorRefs(const CircuitSpec& spec, const ParamVector& w_orig,
                           const Dataset& data,
                           std::span<const std::size_t> anchor);

// Everything J needs besides w. Non-owning views; the referenced objects
// must outlive the problem.
struct UnlearningProblem {
  const CircuitSpec* spec = nullptr;
  const Dataset* data = nullptr;
  Indices forget;
  ForgetTarget target;
  const AnchorRefs* anchors = nullptr;
  double alpha = 1.0;
  double lambda = 0.01;
  ParamVector w_orig;
};

// Optional mini-batch restriction: rows of F and positions into the anchor
// refs. Empty spans mean "use the whole set".
struct ObjectiveBatch {
  std::span<const std::size_t> forget;
  std::span<const std::size_t> anchor_positions;
};

double ForgetTerm(const UnlearningProblem& problem, std::span<const double> w,
                  std::span<const std::size_t> forget_rows);
double Objective(const UnlearningProblem& problem, std::span<const double> w,
                 const ObjectiveBatch& batch = {});
double ObjectiveLagrangianForm(const UnlearningProblem& problem,
                               std::span<const double> w,
                               const ObjectiveBatch& batch = {});

// Exact dJ/dw via the per-logit shift rule.
std::vector<double> ExactObjectiveGradient(const UnlearningProblem& problem,
                                           std::span<const double> w,
                                           const ObjectiveBatch& batch = {});

struct UnlearnConfig {
  double alpha = 1.0;
  double lambda = 0.01;
  double beta = 1.0;
  int steps = 100;
  double lr = 0.05;
  std::size_t forget_batch = 0;  // 0: full forget set each step
  std::size_t anchor_batch = 0;  // 0: full anchor set each step
  double calibration_fraction = 1.0;
  std::uint64_t seed = 0;
  TargetSource target = TargetSource::kSimilarityGuided;
  GradientMode gradient = GradientMode::kShiftRule;
  AdamConfig adam;

  void Validate() const;
};

struct UnlearnResult {
  ParamVector params;
  ParamVector w_orig;
  ForgetTarget target;
  std::vector<double> objective_history;  // J before each step
  std::vector<double> param_delta;        // |w - w0| per coordinate
};

// Adam ascent on J. `partition` must have forget_class, forget and anchor
// filled (see PartitionForgetAnchor).
UnlearnResult Unlearn(const CircuitSpec& spec, const Dataset& data,
                      const SplitPartition& partition,
                      const ParamVector& w_orig, const UnlearnConfig& config);

const char* TargetSourceName(TargetSource source);
nlohmann::json UnlearnConfigToJson(const UnlearnConfig& config);
nlohmann::json ForgetTargetToJson(const ForgetTarget& target);

}  // namespace qmu

#endif  // QMU_UNLEARNING_H_
