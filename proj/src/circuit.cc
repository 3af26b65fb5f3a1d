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

#include "qmu/circuit.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qmu {
namespace {

void AppendFeatureMap(std::vector<Gate>& gates) {
  for (int i = 0; i < kNumFeatures; ++i) {
    gates.push_back(Gate::RY(i, AngleSource::Feature(i)));
  }
  for (int a = 0; a + 1 < kNumFeatures; ++a) {
    const int b = a + 1;
    gates.push_back(Gate::CX(a, b));
    gates.push_back(Gate::RZ(b, AngleSource::FeatureProduct(a, b)));
    gates.push_back(Gate::CX(a, b));
  }
}

void AppendAnsatz(std::vector<Gate>& gates, int block) {
  for (int rep = 0; rep < kAnsatzReps; ++rep) {
    for (int q = 0; q < kNumQubits; ++q) {
      gates.push_back(
          Gate::RY(q, AngleSource::Param(ParamIndex(block, rep, q, 0))));
      gates.push_back(
          Gate::RZ(q, AngleSource::Param(ParamIndex(block, rep, q, 1))));
    }
    for (int q = 0; q < kNumQubits; ++q) {
      gates.push_back(Gate::CX(q, (q + 1) % kNumQubits));
    }
  }
}

}  // namespace

CircuitSpec BuildCircuitSpec() {
  CircuitSpec spec;
  spec.gates.reserve(2 * (13 + 54));
  AppendFeatureMap(spec.gates);
  AppendAnsatz(spec.gates, 0);
  AppendFeatureMap(spec.gates);
  AppendAnsatz(spec.gates, 1);
  return spec;
}

ParamVector::ParamVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(kNumParams)) {
    throw std::invalid_argument("expected " + std::to_string(kNumParams) +
                                " parameters, got " +
                                std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw std::invalid_argument("parameter " + std::to_string(i) +
                                  " is not finite");
    }
  }
}

StateVector Simulate(const CircuitSpec& spec, std::span<const double> params,
                     std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(kNumFeatures)) {
    throw std::invalid_argument("expected " + std::to_string(kNumFeatures) +
                                " features, got " +
                                std::to_string(features.size()));
  }
  if (params.size() != static_cast<std::size_t>(spec.n_params)) {
    throw std::invalid_argument("expected " + std::to_string(spec.n_params) +
                                " parameters, got " +
                                std::to_string(params.size()));
  }
  StateVector state(spec.n_qubits);
  for (const Gate& gate : spec.gates) {
    const double angle =
        gate.kind == GateKind::kCX ? 0.0 : gate.angle.Bind(features, params);
    state.Apply(gate, angle);
  }
  return state;
}

Logits Forward(const CircuitSpec& spec, std::span<const double> params,
               std::span<const double> features) {
  const StateVector state = Simulate(spec, params, features);
  Logits logits{};
  for (int k = 0; k < kNumClasses; ++k) {
    logits[k] = state.ExpectationZ(spec.readout_qubits[k]);
  }
  return logits;
}

ProbDist Softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  ProbDist out;
  out.probs.resize(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out.probs[k] = std::exp(logits[k] - peak);
    total += out.probs[k];
  }
  for (double& p : out.probs) p /= total;
  return out;
}

ProbDist PredictProba(const CircuitSpec& spec, std::span<const double> params,
                      std::span<const double> features) {
  const Logits logits = Forward(spec, params, features);
  return Softmax(logits);
}

int Argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty range");
  return static_cast<int>(std::max_element(values.begin(), values.end()) -
                          values.begin());
}

}  // namespace qmu
