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

#ifndef QMU_EVALUATION_H_
#define QMU_EVALUATION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmu/circuit.h"
#include "qmu/data.h"

namespace qmu {

// Rows are true labels, columns predicted labels.
struct ConfusionMatrix {
  std::vector<std::vector<std::size_t>> counts;

  explicit ConfusionMatrix(int num_classes = kNumClasses)
      : counts(static_cast<std::size_t>(num_classes),
               std::vector<std::size_t>(static_cast<std::size_t>(num_classes),
                                        0)) {}

  int num_classes() const { return static_cast<int>(counts.size()); }
  std::size_t RowSum(int k) const;
  std::size_t Total() const;
  void Add(int truth, int predicted) { ++counts.at(truth).at(predicted); }
};

// Predictions are the argmax of the class probabilities, lowest index on ties.
ConfusionMatrix ComputeConfusionMatrix(const CircuitSpec& spec,
                                       std::span<const double> params,
                                       const Dataset& data,
                                       std::span<const std::size_t> rows);

// recall_k = cm[k][k] / row_sum(k). Throws std::invalid_argument on an empty
// row.
std::vector<double> ClasswiseRecall(const ConfusionMatrix& cm);
double Accuracy(const ConfusionMatrix& cm);
// Accuracy over rows whose true label is not `excluded`.
double AccuracyExcluding(const ConfusionMatrix& cm, int excluded);

// mean p(label | x) over `rows`.
double MeanClassProb(const CircuitSpec& spec, std::span<const double> params,
                     const Dataset& data, std::span<const std::size_t> rows,
                     int label);

// sum_k p_k log(p_k / max(q_k, 1e-12)) in nats; zero-mass p_k terms vanish.
double KlDivergence(const ProbDist& p, const ProbDist& q);

// Restricts `dist` to `labels` and rescales to unit mass. Returns nullopt if
// the retained mass is below 1e-9.
std::optional<ProbDist> Renormalize(const ProbDist& dist,
                                    std::span<const int> labels);

enum class KlDirection { kGoldToUnlearned, kUnlearnedToGold };

struct KlReport {
  std::vector<double> per_sample;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double median = 0.0;
  double max = 0.0;
  std::vector<int> retained_labels;
  double mean_forget_prob_gold = 0.0;
  double mean_forget_prob_unlearned = 0.0;
  std::size_t skipped = 0;
  KlDirection direction = KlDirection::kGoldToUnlearned;
};

// Summary statistics of `values`; all zero when empty.
void Summarize(std::span<const double> values, KlReport& report);

// Per retained test sample: both models' distributions restricted to
// `retained_labels` and renormalized, then KL in `direction`. The forgotten
// class mass is reported un-renormalized.
KlReport KlToGold(const CircuitSpec& spec, std::span<const double> w_gold,
                  std::span<const double> w_unlearned, const Dataset& data,
                  std::span<const std::size_t> retained_rows,
                  std::span<const int> retained_labels, int forget_class,
                  KlDirection direction = KlDirection::kGoldToUnlearned);

struct ParamDeltaSummary {
  std::vector<std::size_t> histogram;  // 20 uniform bins over [0, max]
  double bin_width = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double l2 = 0.0;
};

inline constexpr int kDeltaBins = 20;

// Zero deltas collapse into a single bucket.
ParamDeltaSummary SummarizeParamDelta(std::span<const double> w,
                                      std::span<const double> w_orig);

// Metrics of one model on the test rows.
struct ModelEval {
  std::string stage;
  ConfusionMatrix confusion;
  std::vector<double> recall;
  double accuracy = 0.0;
  double retained_accuracy = 0.0;
  double forget_prob = 0.0;  // mean p(f|x) over test rows of class f
};

ModelEval EvaluateModel(const CircuitSpec& spec, std::span<const double> params,
                        const Dataset& data, std::span<const std::size_t> test,
                        int forget_class, std::string stage);

struct EvalReport {
  std::string dataset;
  int forget_class = 0;
  ModelEval original;
  ModelEval unlearned;
  std::optional<ModelEval> gold;
  std::optional<KlReport> kl;
  ParamDeltaSummary delta;
};

std::string ConfusionCsv(const ConfusionMatrix& cm);
nlohmann::json ConfusionToJson(const ConfusionMatrix& cm);
nlohmann::json KlReportToJson(const KlReport& report);
nlohmann::json ParamDeltaToJson(const ParamDeltaSummary& summary);
nlohmann::json ModelEvalToJson(const ModelEval& eval);
nlohmann::json EvalReportToJson(const EvalReport& report);
// Aligned plain-text tables: class-wise recall before/after with forgotten
// class confidence, then the KL-to-gold summary when present.
std::string FormatEvalReport(const EvalReport& report);

}  // namespace qmu

#endif  // QMU_EVALUATION_H_
