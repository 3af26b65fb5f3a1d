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

// Test-only helpers. The dense simulator here builds each gate as an explicit
// 2^n x 2^n matrix from Kronecker products and shares no code with the
// stride kernels it checks.

#ifndef QMU_TESTS_TEST_UTIL_H_
#define QMU_TESTS_TEST_UTIL_H_

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qmu/circuit.h"
#include "qmu/statevector.h"

namespace qmu::testing {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline CMatrix Kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// factors[q] acts on qubit q; qubit 0 is the least-significant index bit, so
// it is the rightmost Kronecker factor.
inline CMatrix Embed(const std::vector<CMatrix>& factors) {
  CMatrix out = factors.back();
  for (int q = static_cast<int>(factors.size()) - 2; q >= 0; --q) {
    out = Kron(out, factors[static_cast<std::size_t>(q)]);
  }
  return out;
}

inline CMatrix Identity2() { return CMatrix::Identity(2, 2); }

inline CMatrix RyMatrix(double theta) {
  CMatrix m(2, 2);
  m << std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2),
      std::cos(theta / 2);
  return m;
}

inline CMatrix RzMatrix(double theta) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = std::polar(1.0, -theta / 2);
  m(1, 1) = std::polar(1.0, theta / 2);
  return m;
}

inline CMatrix GateMatrix(const Gate& gate, double angle, int n) {
  std::vector<CMatrix> factors(static_cast<std::size_t>(n), Identity2());
  if (gate.kind == GateKind::kRY || gate.kind == GateKind::kRZ) {
    factors[static_cast<std::size_t>(gate.target)] =
        gate.kind == GateKind::kRY ? RyMatrix(angle) : RzMatrix(angle);
    return Embed(factors);
  }
  CMatrix p0 = CMatrix::Zero(2, 2);
  p0(0, 0) = 1;
  CMatrix p1 = CMatrix::Zero(2, 2);
  p1(1, 1) = 1;
  CMatrix x = CMatrix::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1;
  std::vector<CMatrix> off = factors;
  std::vector<CMatrix> on = factors;
  off[static_cast<std::size_t>(*gate.control)] = p0;
  on[static_cast<std::size_t>(*gate.control)] = p1;
  on[static_cast<std::size_t>(gate.target)] = x;
  return Embed(off) + Embed(on);
}

inline CVector ZeroVector(int n) {
  CVector v = CVector::Zero(Eigen::Index{1} << n);
  v(0) = 1;
  return v;
}

inline double DenseExpectationZ(const CVector& v, int qubit) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    total += ((i >> qubit) & 1 ? -1.0 : 1.0) * std::norm(v(i));
  }
  return total;
}

// Logits of the classifier computed with dense matrices.
inline Logits DenseForward(const CircuitSpec& spec,
                           std::span<const double> params,
                           std::span<const double> features) {
  CVector v = ZeroVector(spec.n_qubits);
  for (const Gate& gate : spec.gates) {
    const double angle =
        gate.kind == GateKind::kCX ? 0.0 : gate.angle.Bind(features, params);
    v = GateMatrix(gate, angle, spec.n_qubits) * v;
  }
  Logits out{};
  for (int k = 0; k < kNumClasses; ++k) {
    out[static_cast<std::size_t>(k)] =
        DenseExpectationZ(v, spec.readout_qubits[static_cast<std::size_t>(k)]);
  }
  return out;
}

inline std::vector<double> RandomVector(std::size_t n, double lo, double hi,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Writes a Covertype-layout file (10 continuous columns, 4 wilderness and 40
// soil one-hot columns, integer label 1..7) whose classes differ in their
// continuous means.
inline void WriteSyntheticCovertype(const std::filesystem::path& path,
                                    int rows_per_class, std::uint64_t seed,
                                    bool header = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::ofstream out(path);
  if (header) {
    for (int j = 0; j < 54; ++j) out << "c" << j << ',';
    out << "Cover_Type\n";
  }
  for (int r = 0; r < rows_per_class; ++r) {
    for (int label = 1; label <= 7; ++label) {
      for (int j = 0; j < 10; ++j) {
        const double centre = 100.0 * (j + 1) + 40.0 * label * ((j % 3) - 1);
        out << centre + 25.0 * noise(rng) << ',';
      }
      const int wild = (label + r) % 4;
      for (int j = 0; j < 4; ++j) out << (j == wild ? 1 : 0) << ',';
      const int soil = (3 * label + r) % 40;
      for (int j = 0; j < 40; ++j) out << (j == soil ? 1 : 0) << ',';
      out << label << '\n';
    }
  }
}

inline std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("qmu_test_" + name + "_" +
                    std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path IrisPath() { return QMU_IRIS_CSV; }

}  // namespace qmu::testing

#endif  // QMU_TESTS_TEST_UTIL_H_
