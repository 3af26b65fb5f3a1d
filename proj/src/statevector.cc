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

#include "qmu/statevector.h"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace qmu {

double AngleSource::Bind(std::span<const double> features,
                         std::span<const double> params) const {
  auto at = [](std::span<const double> v, int i, const char* what) {
    if (i < 0 || static_cast<std::size_t>(i) >= v.size()) {
      throw std::out_of_range(std::string(what) + " index " +
                              std::to_string(i) + " out of range");
    }
    return v[static_cast<std::size_t>(i)];
  };
  switch (kind) {
    case Kind::kConstant:
      return constant;
    case Kind::kFeature:
      return at(features, first, "feature");
    case Kind::kFeatureProduct:
      return at(features, first, "feature") * at(features, second, "feature");
    case Kind::kParam:
      return at(params, first, "parameter");
  }
  return 0.0;
}

void ValidateGate(const Gate& gate, int n_qubits) {
  auto in_range = [n_qubits](int q) { return q >= 0 && q < n_qubits; };
  if (!in_range(gate.target)) {
    throw std::invalid_argument("gate target " + std::to_string(gate.target) +
                                " out of range");
  }
  if (gate.kind == GateKind::kCX) {
    if (!gate.control) {
      throw std::invalid_argument("CX gate requires a control qubit");
    }
    if (!in_range(*gate.control)) {
      throw std::invalid_argument("CX control " +
                                  std::to_string(*gate.control) +
                                  " out of range");
    }
    if (*gate.control == gate.target) {
      throw std::invalid_argument("CX control and target coincide");
    }
  } else if (gate.control) {
    throw std::invalid_argument("rotation gate must not carry a control");
  }
}

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::invalid_argument("n_qubits must be in [1, " +
                                std::to_string(kMaxQubits) + "], got " +
                                std::to_string(n_qubits));
  }
  amplitudes_.assign(std::size_t{1} << n_qubits, Complex(0.0, 0.0));
  amplitudes_[0] = Complex(1.0, 0.0);
}

StateVector::StateVector(int n_qubits, std::vector<Complex> amplitudes)
    : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {}

StateVector StateVector::FromAmplitudes(std::vector<Complex> amplitudes) {
  const std::size_t dim = amplitudes.size();
  if (dim < 2 || !std::has_single_bit(dim)) {
    throw std::invalid_argument("amplitude count must be a power of two >= 2");
  }
  const int n = std::countr_zero(dim);
  if (n > kMaxQubits) throw std::invalid_argument("too many qubits");
  return StateVector(n, std::move(amplitudes));
}

void StateVector::CheckQubit(int qubit) const {
  if (qubit < 0 || qubit >= n_qubits_) {
    throw std::invalid_argument("qubit " + std::to_string(qubit) +
                                " out of range for " +
                                std::to_string(n_qubits_) + "-qubit state");
  }
}

double StateVector::SquaredNorm() const {
  double total = 0.0;
  for (const Complex& a : amplitudes_) total += std::norm(a);
  return total;
}

// The kernels below visit each amplitude pair (i0, i1 = i0 | mask) once, with
// i0 enumerated by inserting a zero bit at the target position.

void StateVector::ApplyRY(int target, double theta) {
  CheckQubit(target);
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  const std::size_t mask = std::size_t{1} << target;
  const std::size_t half = amplitudes_.size() >> 1;
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t i0 = ((k & ~(mask - 1)) << 1) | (k & (mask - 1));
    const std::size_t i1 = i0 | mask;
    const Complex a0 = amplitudes_[i0];
    const Complex a1 = amplitudes_[i1];
    amplitudes_[i0] = c * a0 - s * a1;
    amplitudes_[i1] = s * a0 + c * a1;
  }
}

void StateVector::ApplyRZ(int target, double theta) {
  CheckQubit(target);
  const Complex phase0 = std::polar(1.0, -0.5 * theta);
  const Complex phase1 = std::polar(1.0, 0.5 * theta);
  const std::size_t mask = std::size_t{1} << target;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    amplitudes_[i] *= (i & mask) ? phase1 : phase0;
  }
}

void StateVector::ApplyCX(int control, int target) {
  CheckQubit(control);
  CheckQubit(target);
  if (control == target) {
    throw std::invalid_argument("CX control and target coincide");
  }
  const std::size_t cmask = std::size_t{1} << control;
  const std::size_t tmask = std::size_t{1} << target;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if ((i & cmask) && !(i & tmask)) {
      std::swap(amplitudes_[i], amplitudes_[i | tmask]);
    }
  }
}

void StateVector::Apply(const Gate& gate, double bound_angle) {
  switch (gate.kind) {
    case GateKind::kRY:
      ApplyRY(gate.target, bound_angle);
      break;
    case GateKind::kRZ:
      ApplyRZ(gate.target, bound_angle);
      break;
    case GateKind::kCX:
      if (!gate.control) {
        throw std::invalid_argument("CX gate requires a control qubit");
      }
      ApplyCX(*gate.control, gate.target);
      break;
  }
}

double StateVector::ExpectationZ(int qubit) const {
  CheckQubit(qubit);
  const std::size_t mask = std::size_t{1} << qubit;
  double plus = 0.0;
  double minus = 0.0;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
    if (i & mask) {
      minus += std::norm(amplitudes_[i]);
    } else {
      plus += std::norm(amplitudes_[i]);
    }
  }
  return plus - minus;
}

StateVector InitZeroState(int n_qubits) { return StateVector(n_qubits); }

StateVector ApplyGate(StateVector state, const Gate& gate, double bound_angle) {
  ValidateGate(gate, state.n_qubits());
  if (gate.kind != GateKind::kCX && !std::isfinite(bound_angle)) {
    throw std::invalid_argument("rotation angle must be finite");
  }
  state.Apply(gate, bound_angle);
  return state;
}

double ExpectationZ(const StateVector& state, int qubit) {
  return state.ExpectationZ(qubit);
}

}  // namespace qmu
