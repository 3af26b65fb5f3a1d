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

#include "qmu/evaluation.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "qmu/training.h"

namespace qmu {

std::size_t ConfusionMatrix::RowSum(int k) const {
  std::size_t total = 0;
  for (std::size_t c : counts.at(static_cast<std::size_t>(k))) total += c;
  return total;
}

std::size_t ConfusionMatrix::Total() const {
  std::size_t total = 0;
  for (int k = 0; k < num_classes(); ++k) total += RowSum(k);
  return total;
}

ConfusionMatrix ComputeConfusionMatrix(const CircuitSpec& spec,
                                       std::span<const double> params,
                                       const Dataset& data,
                                       std::span<const std::size_t> rows) {
  if (rows.empty()) throw std::invalid_argument("empty evaluation set");
  ConfusionMatrix cm(kNumClasses);
  for (std::size_t row : rows) {
    const ProbDist p = PredictProba(spec, params, data.row(row));
    cm.Add(data.y.at(row), Argmax(p));
  }
  return cm;
}

std::vector<double> ClasswiseRecall(const ConfusionMatrix& cm) {
  std::vector<double> recall(static_cast<std::size_t>(cm.num_classes()));
  for (int k = 0; k < cm.num_classes(); ++k) {
    const std::size_t row = cm.RowSum(k);
    if (row == 0) {
      throw std::invalid_argument("class " + std::to_string(k) +
                                  " has no samples; recall undefined");
    }
    recall[k] = static_cast<double>(cm.counts[k][k]) / static_cast<double>(row);
  }
  return recall;
}

double Accuracy(const ConfusionMatrix& cm) {
  return AccuracyExcluding(cm, -1);
}

double AccuracyExcluding(const ConfusionMatrix& cm, int excluded) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (int k = 0; k < cm.num_classes(); ++k) {
    if (k == excluded) continue;
    correct += cm.counts[k][k];
    total += cm.RowSum(k);
  }
  if (total == 0) throw std::invalid_argument("no rows to score");
  return static_cast<double>(correct) / static_cast<double>(total);
}

double MeanClassProb(const CircuitSpec& spec, std::span<const double> params,
                     const Dataset& data, std::span<const std::size_t> rows,
                     int label) {
  if (rows.empty()) throw std::invalid_argument("empty sample set");
  double total = 0.0;
  for (std::size_t row : rows) {
    total += PredictProba(spec, params, data.row(row))
                 .probs.at(static_cast<std::size_t>(label));
  }
  return total / static_cast<double>(rows.size());
}

double KlDivergence(const ProbDist& p, const ProbDist& q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("KL of distributions with different supports");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.probs[k] <= 0.0) continue;
    total += p.probs[k] *
             (std::log(p.probs[k]) - std::log(std::max(q.probs[k], kProbFloor)));
  }
  // Rounding can leave -1e-17 for identical inputs.
  return std::max(total, 0.0);
}

std::optional<ProbDist> Renormalize(const ProbDist& dist,
                                    std::span<const int> labels) {
  double mass = 0.0;
  for (int k : labels) mass += dist.probs.at(static_cast<std::size_t>(k));
  if (mass < 1e-9) return std::nullopt;
  ProbDist out;
  out.probs.reserve(labels.size());
  for (int k : labels) out.probs.push_back(dist.probs[k] / mass);
  return out;
}

void Summarize(std::span<const double> values, KlReport& report) {
  report.mean = report.std = report.median = report.max = 0.0;
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  report.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - report.mean) * (v - report.mean);
  report.std = std::sqrt(sq / n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  report.median = sorted.size() % 2 == 1
                      ? sorted[mid]
                      : 0.5 * (sorted[mid - 1] + sorted[mid]);
  report.max = sorted.back();
}

KlReport KlToGold(const CircuitSpec& spec, std::span<const double> w_gold,
                  std::span<const double> w_unlearned, const Dataset& data,
                  std::span<const std::size_t> retained_rows,
                  std::span<const int> retained_labels, int forget_class,
                  KlDirection direction) {
  if (retained_rows.empty()) throw std::invalid_argument("no retained rows");
  KlReport report;
  report.direction = direction;
  report.retained_labels.assign(retained_labels.begin(), retained_labels.end());
  double gold_mass = 0.0;
  double unlearned_mass = 0.0;
  for (std::size_t row : retained_rows) {
    if (data.y.at(row) == forget_class) {
      throw std::invalid_argument("row " + std::to_string(row) +
                                  " belongs to the forgotten class");
    }
    const ProbDist gold = PredictProba(spec, w_gold, data.row(row));
    const ProbDist unlearned = PredictProba(spec, w_unlearned, data.row(row));
    gold_mass += gold.probs.at(static_cast<std::size_t>(forget_class));
    unlearned_mass += unlearned.probs.at(static_cast<std::size_t>(forget_class));
    const auto g = Renormalize(gold, retained_labels);
    const auto u = Renormalize(unlearned, retained_labels);
    if (!g || !u) {
      ++report.skipped;
      continue;
    }
    report.per_sample.push_back(direction == KlDirection::kGoldToUnlearned
                                    ? KlDivergence(*g, *u)
                                    : KlDivergence(*u, *g));
  }
  const double n = static_cast<double>(retained_rows.size());
  report.mean_forget_prob_gold = gold_mass / n;
  report.mean_forget_prob_unlearned = unlearned_mass / n;
  Summarize(report.per_sample, report);
  return report;
}

ParamDeltaSummary SummarizeParamDelta(std::span<const double> w,
                                      std::span<const double> w_orig) {
  if (w.size() != w_orig.size()) {
    throw std::invalid_argument("parameter vectors differ in length");
  }
  ParamDeltaSummary out;
  std::vector<double> delta(w.size());
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    delta[i] = std::abs(w[i] - w_orig[i]);
    out.max = std::max(out.max, delta[i]);
    sum += delta[i];
    sq += delta[i] * delta[i];
  }
  out.mean = w.empty() ? 0.0 : sum / static_cast<double>(w.size());
  out.l2 = std::sqrt(sq);
  if (out.max == 0.0) {
    out.histogram = {w.size()};
    return out;
  }
  out.bin_width = out.max / kDeltaBins;
  out.histogram.assign(kDeltaBins, 0);
  for (double d : delta) {
    const auto bin = std::min<std::size_t>(
        kDeltaBins - 1, static_cast<std::size_t>(d / out.bin_width));
    ++out.histogram[bin];
  }
  return out;
}

ModelEval EvaluateModel(const CircuitSpec& spec, std::span<const double> params,
                        const Dataset& data, std::span<const std::size_t> test,
                        int forget_class, std::string stage) {
  ModelEval out;
  out.stage = std::move(stage);
  out.confusion = ComputeConfusionMatrix(spec, params, data, test);
  out.recall = ClasswiseRecall(out.confusion);
  out.accuracy = Accuracy(out.confusion);
  out.retained_accuracy = AccuracyExcluding(out.confusion, forget_class);
  const Indices forget_rows = FilterByLabel(data, test, forget_class);
  out.forget_prob = MeanClassProb(spec, params, data, forget_rows, forget_class);
  return out;
}

std::string ConfusionCsv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  for (const auto& row : cm.counts) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << (j ? "," : "") << row[j];
    }
    out << '\n';
  }
  return out.str();
}

nlohmann::json ConfusionToJson(const ConfusionMatrix& cm) { return cm.counts; }

nlohmann::json KlReportToJson(const KlReport& report) {
  return {{"per_sample", report.per_sample},
          {"mean", report.mean},
          {"std", report.std},
          {"median", report.median},
          {"max", report.max},
          {"retained_labels", report.retained_labels},
          {"mean_forget_prob_gold", report.mean_forget_prob_gold},
          {"mean_forget_prob_unlearned", report.mean_forget_prob_unlearned},
          {"skipped", report.skipped},
          {"direction", report.direction == KlDirection::kGoldToUnlearned
                            ? "KL(gold||unlearned)"
                            : "KL(unlearned||gold)"},
          {"log_base", "e"}};
}

nlohmann::json ParamDeltaToJson(const ParamDeltaSummary& summary) {
  return {{"histogram", summary.histogram},
          {"bin_width", summary.bin_width},
          {"max", summary.max},
          {"mean", summary.mean},
          {"l2", summary.l2}};
}

nlohmann::json ModelEvalToJson(const ModelEval& eval) {
  return {{"stage", eval.stage},
          {"confusion", ConfusionToJson(eval.confusion)},
          {"recall", eval.recall},
          {"accuracy", eval.accuracy},
          {"retained_accuracy", eval.retained_accuracy},
          {"forget_prob", eval.forget_prob}};
}

nlohmann::json EvalReportToJson(const EvalReport& report) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["forget_class"] = report.forget_class;
  j["original"] = ModelEvalToJson(report.original);
  j["unlearned"] = ModelEvalToJson(report.unlearned);
  j["gold"] = report.gold ? ModelEvalToJson(*report.gold) : nlohmann::json();
  j["kl_to_gold"] = report.kl ? KlReportToJson(*report.kl) : nlohmann::json();
  j["param_delta"] = ParamDeltaToJson(report.delta);
  return j;
}

std::string FormatEvalReport(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "Class-wise recall (" << report.dataset << ", forgotten class "
      << report.forget_class << ")\n";
  out << std::left << std::setw(8) << "Class" << std::right << std::setw(12)
      << "Recall(B)" << std::setw(12) << "Recall(A)" << std::setw(12)
      << "Delta" << '\n';
  for (std::size_t k = 0; k < report.original.recall.size(); ++k) {
    std::string label = std::to_string(k);
    if (static_cast<int>(k) == report.forget_class) label += " (F)";
    out << std::left << std::setw(8) << label << std::right << std::setw(12)
        << report.original.recall[k] << std::setw(12)
        << report.unlearned.recall[k] << std::setw(12)
        << report.unlearned.recall[k] - report.original.recall[k] << '\n';
  }
  out << std::setprecision(4);
  out << "Forget-class mean probability: " << report.original.forget_prob
      << " -> " << report.unlearned.forget_prob << '\n';
  out << "Test accuracy: " << report.original.accuracy << " -> "
      << report.unlearned.accuracy << " (retained-only "
      << report.original.retained_accuracy << " -> "
      << report.unlearned.retained_accuracy << ")\n";
  if (report.kl) {
    const KlReport& kl = *report.kl;
    out << "\nKL to gold on retained test data ("
        << (kl.direction == KlDirection::kGoldToUnlearned
                ? "KL(gold||unlearned)"
                : "KL(unlearned||gold)")
        << ", nats, renormalized)\n";
    out << std::left << std::setw(12) << "Ret.Labels" << std::right
        << std::setw(10) << "Mean" << std::setw(10) << "Std" << std::setw(10)
        << "Median" << std::setw(10) << "Max" << '\n';
    std::string labels = "{";
    for (std::size_t i = 0; i < kl.retained_labels.size(); ++i) {
      labels += (i ? "," : "") + std::to_string(kl.retained_labels[i]);
    }
    labels += "}";
    out << std::left << std::setw(12) << labels << std::right << std::setw(10)
        << kl.mean << std::setw(10) << kl.std << std::setw(10) << kl.median
        << std::setw(10) << kl.max << '\n';
    out << "Mean prob. on forgotten class (retained samples): gold "
        << kl.mean_forget_prob_gold << ", unlearned "
        << kl.mean_forget_prob_unlearned << '\n';
    if (kl.skipped > 0) out << "Skipped samples: " << kl.skipped << '\n';
  }
  out << "\nParameter change: max " << report.delta.max << ", mean "
      << report.delta.mean << ", l2 " << report.delta.l2 << '\n';
  return out.str();
}

}  // namespace qmu
