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

#ifndef QMU_STATEVECTOR_H_
#define QMU_STATEVECTOR_H_

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qmu {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 24;

// Where a rotation angle comes from when a circuit is bound to inputs.
// Features are indexed into the (scaled) feature vector, parameters into the
// trainable parameter vector.
struct AngleSource {
  enum class Kind { kConstant, kFeature, kFeatureProduct, kParam };

  Kind kind = Kind::kConstant;
  double constant = 0.0;
  int first = 0;   // feature index or parameter index
  int second = 0;  // second feature index for kFeatureProduct

  static AngleSource Constant(double value) {
    return {Kind::kConstant, value, 0, 0};
  }
  static AngleSource Feature(int i) { return {Kind::kFeature, 0.0, i, 0}; }
  static AngleSource FeatureProduct(int i, int j) {
    return {Kind::kFeatureProduct, 0.0, i, j};
  }
  static AngleSource Param(int p) { return {Kind::kParam, 0.0, p, 0}; }

  // Resolves the angle. Out-of-range indices throw std::out_of_range.
  double Bind(std::span<const double> features,
              std::span<const double> params) const;

  friend bool operator==(const AngleSource&, const AngleSource&) = default;
};

enum class GateKind { kRY, kRZ, kCX };

struct Gate {
  GateKind kind = GateKind::kRY;
  int target = 0;
  std::optional<int> control;  // present iff kind == kCX
  AngleSource angle;           // ignored for kCX

  static Gate RY(int target, AngleSource angle) {
    return {GateKind::kRY, target, std::nullopt, angle};
  }
  static Gate RZ(int target, AngleSource angle) {
    return {GateKind::kRZ, target, std::nullopt, angle};
  }
  static Gate CX(int control, int target) {
    return {GateKind::kCX, target, control, AngleSource{}};
  }

  friend bool operator==(const Gate&, const Gate&) = default;
};

// Checks the structural invariants of a gate against a register size.
// Throws std::invalid_argument on violation.
void ValidateGate(const Gate& gate, int n_qubits);

// Dense n-qubit pure state. Qubit 0 is the least-significant bit of the
// amplitude index.
class StateVector {
 public:
  // |0...0>. Throws std::invalid_argument unless 1 <= n_qubits <= kMaxQubits.
  explicit StateVector(int n_qubits);

  // Takes ownership of explicit amplitudes; size must be a power of two.
  static StateVector FromAmplitudes(std::vector<Complex> amplitudes);

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return amplitudes_.size(); }
  std::span<const Complex> amplitudes() const { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

  double SquaredNorm() const;

  void ApplyRY(int target, double theta);
  void ApplyRZ(int target, double theta);
  void ApplyCX(int control, int target);

  // Applies `gate` with an already-resolved angle (ignored for CX).
  void Apply(const Gate& gate, double bound_angle);

  // <Z> on `qubit`, in [-1, 1].
  double ExpectationZ(int qubit) const;

 private:
  StateVector(int n_qubits, std::vector<Complex> amplitudes);
  void CheckQubit(int qubit) const;

  int n_qubits_;
  std::vector<Complex> amplitudes_;
};

// Free-function forms.
StateVector InitZeroState(int n_qubits);
StateVector ApplyGate(StateVector state, const Gate& gate, double bound_angle);
double ExpectationZ(const StateVector& state, int qubit);

}  // namespace qmu

#endif  // QMU_STATEVECTOR_H_
