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

// The six-qubit reuploading classifier:
//
//   |000000> -- FM(x) -- A(w[0:36]) -- FM(x) -- A(w[36:72]) -- <Z> on 3,4,5
//
// FM(x):  RY(x_i) on qubits 0..3, then CX(a,b) RZ(x_a x_b) CX(a,b) on the
//         pairs (0,1), (1,2), (2,3).
// A(w):   three repetitions of { RY(w), RZ(w) on every qubit; CX ring
//         (q, q+1 mod 6) for q = 0..5 }.
//
// Parameters are ordered block-major, then repetition, then qubit, with the
// RY angle before the RZ angle.

#ifndef QMU_CIRCUIT_H_
#define QMU_CIRCUIT_H_

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "qmu/statevector.h"

namespace qmu {

inline constexpr int kNumQubits = 6;
inline constexpr int kNumFeatures = 4;
inline constexpr int kNumClasses = 3;
inline constexpr int kAnsatzReps = 3;
inline constexpr int kNumParams = 72;
inline constexpr std::array<int, kNumClasses> kReadoutQubits = {3, 4, 5};
inline constexpr const char* kParamOrderTag = "block.rep.qubit.ry-rz.v1";

struct CircuitSpec {
  int n_qubits = kNumQubits;
  int n_params = kNumParams;
  std::vector<Gate> gates;
  std::array<int, kNumClasses> readout_qubits = kReadoutQubits;
};

// Deterministic; every call returns the same gate program.
CircuitSpec BuildCircuitSpec();

// Index of the parameter feeding RY (rotation = 0) or RZ (rotation = 1) on
// `qubit` in repetition `rep` of ansatz block `block`.
constexpr int ParamIndex(int block, int rep, int qubit, int rotation) {
  return ((block * kAnsatzReps + rep) * kNumQubits + qubit) * 2 + rotation;
}

// The trainable angles. Always kNumParams finite values.
class ParamVector {
 public:
  ParamVector() : values_(kNumParams, 0.0) {}
  // Throws std::invalid_argument on wrong length or non-finite entries.
  explicit ParamVector(std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> span() const { return values_; }
  std::span<double> span() { return values_; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

// A categorical distribution over classes.
struct ProbDist {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t k) const { return probs[k]; }

  friend bool operator==(const ProbDist&, const ProbDist&) = default;
};

using Logits = std::array<double, kNumClasses>;

// <Z> on the readout qubits after simulating the bound circuit. `features`
// must have kNumFeatures entries already scaled to [0, pi].
Logits Forward(const CircuitSpec& spec, std::span<const double> params,
               std::span<const double> features);
inline Logits Forward(const CircuitSpec& spec, const ParamVector& params,
                      std::span<const double> features) {
  return Forward(spec, params.span(), features);
}

// Simulates the bound circuit and returns the final state.
StateVector Simulate(const CircuitSpec& spec, std::span<const double> params,
                     std::span<const double> features);

// Max-subtracted softmax.
ProbDist Softmax(std::span<const double> logits);

ProbDist PredictProba(const CircuitSpec& spec, std::span<const double> params,
                      std::span<const double> features);
inline ProbDist PredictProba(const CircuitSpec& spec, const ParamVector& params,
                             std::span<const double> features) {
  return PredictProba(spec, params.span(), features);
}

// Lowest index wins ties.
int Argmax(std::span<const double> values);
inline int Argmax(const ProbDist& dist) { return Argmax(dist.probs); }

}  // namespace qmu

#endif  // QMU_CIRCUIT_H_
