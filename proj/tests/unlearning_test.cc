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
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "qmu/errors.h"
#include "qmu/training.h"
#include "test_util.h"

namespace qmu {
namespace {

using ::qmu::testing::IrisPath;
using ::qmu::testing::RandomVector;

constexpr double kPi = std::numbers::pi;

void ExpectValidTarget(const ForgetTarget& t) {
  double sum = 0.0;
  for (double v : t.q.probs) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(t.q.probs.at(static_cast<std::size_t>(t.forget_class)), 0.0);
}

class UnlearningFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    DataConfig config = DefaultDataConfig(DatasetKind::kIris);
    config.path = IrisPath();
    prep_ = new PreparedData(Prepare(config));
    prep_->partition =
        PartitionForgetAnchor(prep_->partition, prep_->data, 2);
  }
  static void TearDownTestSuite() {
    delete prep_;
    prep_ = nullptr;
  }

  // Random w_orig, three forget rows and three anchor rows.
  struct SmallProblem {
    ParamVector w_orig;
    AnchorRefs refs;
    UnlearningProblem problem;
  };

  SmallProblem MakeSmall(std::uint64_t seed, double alpha, double lambda,
                         std::size_t n = 3) {
    std::mt19937_64 rng(seed);
    SmallProblem s;
    s.w_orig = ParamVector(RandomVector(kNumParams, -kPi, kPi, rng));
    Indices forget = prep_->partition.forget;
    Indices anchor = prep_->partition.anchor;
    std::shuffle(forget.begin(), forget.end(), rng);
    std::shuffle(anchor.begin(), anchor.end(), rng);
    forget.resize(n);
    anchor.resize(n);
    s.refs = CacheAnchorRefs(spec_, s.w_orig, prep_->data, anchor);
    s.problem.spec = &spec_;
    s.problem.data = &prep_->data;
    s.problem.forget = forget;
    s.problem.target = ComputeForgetTarget(spec_, s.w_orig, prep_->data,
                                           forget, 2, 1.0);
    s.problem.alpha = alpha;
    s.problem.lambda = lambda;
    s.problem.w_orig = s.w_orig;
    return s;
  }

  // The anchors pointer must be bound after the struct reaches its final
  // address.
  static void Bind(SmallProblem& s) { s.problem.anchors = &s.refs; }

  const CircuitSpec spec_ = BuildCircuitSpec();
  static PreparedData* prep_;
};

PreparedData* UnlearningFixture::prep_ = nullptr;

TEST(ForgetTargetTest, MeansExample) {
  const std::vector<double> means = {0.3, 0.2, 0.5};
  const ForgetTarget t = ForgetTargetFromMeans(means, 2, 1.0);
  EXPECT_NEAR(t.q[0], 0.6, 1e-15);
  EXPECT_NEAR(t.q[1], 0.4, 1e-15);
  EXPECT_EQ(t.q[2], 0.0);
  EXPECT_EQ(t.source, TargetSource::kSimilarityGuided);
  ExpectValidTarget(t);
}

TEST(ForgetTargetTest, SharpBetaConcentratesMass) {
  const std::vector<double> means = {0.3, 0.2, 0.5};
  const ForgetTarget t = ForgetTargetFromMeans(means, 2, 8.0);
  const double want = std::pow(0.3, 8) / (std::pow(0.3, 8) + std::pow(0.2, 8));
  EXPECT_NEAR(t.q[0], want, 1e-14);
  EXPECT_NEAR(t.q[0], 0.962, 1e-3);
  ExpectValidTarget(t);
}

TEST(ForgetTargetTest, EqualMeansGiveUniformRetained) {
  for (double beta : {0.25, 1.0, 3.0, 17.0}) {
    const std::vector<double> means = {0.1, 0.45, 0.45};
    const ForgetTarget t = ForgetTargetFromMeans(means, 0, beta);
    EXPECT_EQ(t.q[0], 0.0);
    EXPECT_NEAR(t.q[1], 0.5, 1e-15);
    EXPECT_NEAR(t.q[2], 0.5, 1e-15);
  }
}

TEST(ForgetTargetTest, MonotoneInBetaAndAlwaysOnSimplex) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> means = {u(rng), u(rng), u(rng)};
    const double total = means[0] + means[1] + means[2];
    for (double& m : means) m /= total;
    const int f = trial % 3;
    const int a = (f + 1) % 3;
    const int b = (f + 2) % 3;
    if (means[static_cast<std::size_t>(a)] == means[static_cast<std::size_t>(b)]) continue;
    const int hi = means[static_cast<std::size_t>(a)] > means[static_cast<std::size_t>(b)] ? a : b;
    double prev = -1.0;
    for (double beta = 0.25; beta <= 8.0; beta += 0.25) {
      const ForgetTarget t = ForgetTargetFromMeans(means, f, beta);
      ExpectValidTarget(t);
      const double q_hi = t.q[static_cast<std::size_t>(hi)];
      EXPECT_GT(q_hi, prev) << "beta " << beta;
      prev = q_hi;
    }
  }
}

TEST(ForgetTargetTest, RejectsBadInputs) {
  const std::vector<double> means = {0.3, 0.2, 0.5};
  EXPECT_THROW(ForgetTargetFromMeans(means, 2, 0.0), ConfigError);
  EXPECT_THROW(ForgetTargetFromMeans(means, 3, 1.0), std::invalid_argument);
  const std::vector<double> zeros = {0.0, 0.0, 1.0};
  EXPECT_THROW(ForgetTargetFromMeans(zeros, 2, 1.0), NumericError);
}

TEST(UniformTargetTest, Examples) {
  const ForgetTarget a = UniformForgetTarget(2, 3);
  EXPECT_EQ(a.q.probs, (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(a.source, TargetSource::kUniform);
  EXPECT_EQ(UniformForgetTarget(0, 3).q.probs,
            (std::vector<double>{0.0, 0.5, 0.5}));
  EXPECT_EQ(UniformForgetTarget(1, 2).q.probs,
            (std::vector<double>{1.0, 0.0}));
  ExpectValidTarget(a);
  EXPECT_THROW(UniformForgetTarget(0, 1), std::invalid_argument);
}

TEST_F(UnlearningFixture, ComputeForgetTargetUsesCalibrationMeans) {
  std::mt19937_64 rng(2);
  const ParamVector w(RandomVector(kNumParams, -kPi, kPi, rng));
  const Indices& forget = prep_->partition.forget;
  std::vector<double> means(3, 0.0);
  for (std::size_t row : forget) {
    const ProbDist p = PredictProba(spec_, w, prep_->data.row(row));
    for (std::size_t k = 0; k < 3; ++k) means[k] += p[k];
  }
  const double w0 = std::pow(means[0], 2.0);
  const double w1 = std::pow(means[1], 2.0);
  const ForgetTarget t =
      ComputeForgetTarget(spec_, w, prep_->data, forget, 2, 2.0);
  EXPECT_NEAR(t.q[0], w0 / (w0 + w1), 1e-12);
  EXPECT_EQ(t.q[2], 0.0);
  EXPECT_THROW(ComputeForgetTarget(spec_, w, prep_->data,
                                   prep_->partition.anchor, 2, 1.0),
               std::invalid_argument);
}

TEST_F(UnlearningFixture, AnchorRefsAreBitwisePredictions) {
  std::mt19937_64 rng(3);
  const ParamVector w(RandomVector(kNumParams, -kPi, kPi, rng));
  const Indices& anchor = prep_->partition.anchor;
  const AnchorRefs refs = CacheAnchorRefs(spec_, w, prep_->data, anchor);
  ASSERT_EQ(refs.size(), anchor.size());
  EXPECT_EQ(refs.indices, anchor);
  for (std::size_t i = 0; i < anchor.size(); ++i) {
    EXPECT_EQ(refs.refs[i], PredictProba(spec_, w, prep_->data.row(anchor[i])));
  }
}

TEST_F(UnlearningFixture, RefsUnchangedByObjectiveEvaluation) {
  SmallProblem s = MakeSmall(4, 1.0, 0.01);
  Bind(s);
  const AnchorRefs before = s.refs;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    const auto w = RandomVector(kNumParams, -kPi, kPi, rng);
    Objective(s.problem, w);
    ObjectiveLagrangianForm(s.problem, w);
    ExactObjectiveGradient(s.problem, w);
  }
  EXPECT_EQ(s.refs.indices, before.indices);
  EXPECT_EQ(s.refs.refs, before.refs);
}

TEST_F(UnlearningFixture, PenaltyVanishesAtOrigin) {
  SmallProblem with = MakeSmall(6, 1.0, 0.5);
  Bind(with);
  SmallProblem without = MakeSmall(6, 1.0, 0.0);
  Bind(without);
  EXPECT_EQ(Objective(with.problem, with.w_orig.span()),
            Objective(without.problem, without.w_orig.span()));
  std::vector<double> moved(with.w_orig.values());
  moved[0] += 0.2;
  moved[5] -= 0.1;
  EXPECT_NEAR(Objective(without.problem, moved) - Objective(with.problem, moved),
              0.5 * (0.04 + 0.01), 1e-12);
}

TEST_F(UnlearningFixture, GibbsBoundWithoutAnchorOrPenalty) {
  SmallProblem s = MakeSmall(7, 0.0, 0.0);
  Bind(s);
  double bound = 0.0;
  for (double q : s.problem.target.q.probs) {
    if (q > 0.0) bound += q * std::log(q);
  }
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto w = RandomVector(kNumParams, -kPi, kPi, rng);
    EXPECT_LE(Objective(s.problem, w), bound + 1e-15);
  }
}

TEST_F(UnlearningFixture, ObjectiveMatchesReverseOrderResummation) {
  SmallProblem s = MakeSmall(9, 1.3, 0.07);
  Bind(s);
  std::mt19937_64 rng(10);
  const auto w = RandomVector(kNumParams, -kPi, kPi, rng);

  const auto& q = s.problem.target.q.probs;
  double forget = 0.0;
  for (std::size_t i = s.problem.forget.size(); i-- > 0;) {
    const ProbDist p =
        PredictProba(spec_, w, prep_->data.row(s.problem.forget[i]));
    for (std::size_t k = 3; k-- > 0;) {
      if (q[k] != 0.0) forget += q[k] * std::log(std::max(p[k], 1e-12));
    }
  }
  double anchor = 0.0;
  for (std::size_t i = s.refs.size(); i-- > 0;) {
    const ProbDist p = PredictProba(spec_, w, prep_->data.row(s.refs.indices[i]));
    for (std::size_t k = 3; k-- > 0;) {
      const double r = s.refs.refs[i][k];
      if (r != 0.0) anchor += r * std::log(std::max(p[k], 1e-12));
    }
  }
  double dist = 0.0;
  for (std::size_t i = w.size(); i-- > 0;) {
    dist += (w[i] - s.w_orig[i]) * (w[i] - s.w_orig[i]);
  }
  const double want = forget / 3.0 + 1.3 * anchor / 3.0 - 0.07 * dist;
  EXPECT_NEAR(Objective(s.problem, w), want, 1e-12);
}

TEST_F(UnlearningFixture, LagrangianFormDiffersByConstant) {
  SmallProblem s = MakeSmall(11, 1.0, 0.01, 5);
  Bind(s);
  double constant = 0.0;
  for (const ProbDist& r : s.refs.refs) {
    for (double v : r.probs) {
      if (v > 0.0) constant += v * std::log(v);
    }
  }
  constant *= s.problem.alpha / static_cast<double>(s.refs.size());
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10; ++i) {
    const auto w1 = RandomVector(kNumParams, -kPi, kPi, rng);
    const auto w2 = RandomVector(kNumParams, -kPi, kPi, rng);
    const double dj = Objective(s.problem, w1) - Objective(s.problem, w2);
    const double djl = ObjectiveLagrangianForm(s.problem, w1) -
                       ObjectiveLagrangianForm(s.problem, w2);
    EXPECT_NEAR(dj, djl, 1e-10);
    EXPECT_NEAR(Objective(s.problem, w1) - ObjectiveLagrangianForm(s.problem, w1),
                constant, 1e-10);
  }
  const double at_origin = ObjectiveLagrangianForm(s.problem, s.w_orig.span());
  EXPECT_EQ(at_origin,
            ForgetTerm(s.problem, s.w_orig.span(), s.problem.forget));
}

TEST_F(UnlearningFixture, FormsCoincideWithoutAnchorWeight) {
  SmallProblem s = MakeSmall(13, 0.0, 0.02);
  Bind(s);
  std::mt19937_64 rng(14);
  for (int i = 0; i < 5; ++i) {
    const auto w = RandomVector(kNumParams, -kPi, kPi, rng);
    EXPECT_EQ(Objective(s.problem, w), ObjectiveLagrangianForm(s.problem, w));
  }
}

TEST_F(UnlearningFixture, ExactGradientMatchesFiniteDifference) {
  SmallProblem s = MakeSmall(15, 0.8, 0.05, 2);
  Bind(s);
  std::mt19937_64 rng(16);
  const auto w = RandomVector(kNumParams, -kPi, kPi, rng);
  const auto g = ExactObjectiveGradient(s.problem, w);
  const double h = 1e-6;
  std::vector<double> v = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    v[i] = w[i] + h;
    const double plus = Objective(s.problem, v);
    v[i] = w[i] - h;
    const double minus = Objective(s.problem, v);
    v[i] = w[i];
    EXPECT_NEAR(g[i], (plus - minus) / (2 * h), 1e-6) << "param " << i;
  }
}

TEST_F(UnlearningFixture, BatchSelectsSubsets) {
  SmallProblem s = MakeSmall(17, 1.0, 0.0);
  Bind(s);
  std::mt19937_64 rng(18);
  const auto w = RandomVector(kNumParams, -kPi, kPi, rng);
  const Indices one_forget = {s.problem.forget[1]};
  const Indices one_anchor = {2};
  const double got = Objective(s.problem, w, {one_forget, one_anchor});
  const ProbDist pf = PredictProba(spec_, w, prep_->data.row(one_forget[0]));
  const ProbDist pa =
      PredictProba(spec_, w, prep_->data.row(s.refs.indices[2]));
  double want = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double qk = s.problem.target.q[k];
    if (qk != 0.0) want += qk * std::log(pf[k]);
    want += s.refs.refs[2][k] * std::log(pa[k]);
  }
  EXPECT_NEAR(got, want, 1e-12);
}

TEST(UnlearnConfigTest, Validation) {
  UnlearnConfig config;
  EXPECT_EQ(config.alpha, 1.0);
  EXPECT_EQ(config.lambda, 0.01);
  EXPECT_EQ(config.beta, 1.0);
  EXPECT_NO_THROW(config.Validate());
  config.alpha = -1.0;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = UnlearnConfig{};
  config.lambda = -0.1;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = UnlearnConfig{};
  config.beta = 0.0;
  EXPECT_THROW(config.Validate(), ConfigError);
  config = UnlearnConfig{};
  config.steps = -1;
  EXPECT_THROW(config.Validate(), ConfigError);
}

TEST_F(UnlearningFixture, ZeroStepsReturnsOriginal) {
  std::mt19937_64 rng(19);
  const ParamVector w(RandomVector(kNumParams, -1.0, 1.0, rng));
  UnlearnConfig config;
  config.steps = 0;
  const UnlearnResult r =
      Unlearn(spec_, prep_->data, prep_->partition, w, config);
  EXPECT_EQ(r.params, w);
  EXPECT_TRUE(r.objective_history.empty());
  for (double d : r.param_delta) EXPECT_EQ(d, 0.0);
}

TEST_F(UnlearningFixture, RequiresForgetPartition) {
  SplitPartition plain = prep_->partition;
  plain.forget_class.reset();
  EXPECT_THROW(Unlearn(spec_, prep_->data, plain, ParamVector(), {}),
               ConfigError);
}

TEST_F(UnlearningFixture, SingleSampleAscentIsNearlyMonotone) {
  std::mt19937_64 rng(20);
  const ParamVector w(RandomVector(kNumParams, -kPi, kPi, rng));
  SplitPartition p = prep_->partition;
  p.forget = {p.forget.front()};
  p.anchor = {p.anchor.front()};
  UnlearnConfig config;
  config.alpha = 0.0;
  config.lambda = 0.0;
  config.lr = 1e-3;
  config.steps = 20;
  const UnlearnResult r = Unlearn(spec_, prep_->data, p, w, config);
  ASSERT_EQ(r.objective_history.size(), 20u);
  int violations = 0;
  for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
    if (r.objective_history[i] < r.objective_history[i - 1]) ++violations;
  }
  EXPECT_LE(violations, 2);
  EXPECT_GT(r.objective_history.back(), r.objective_history.front());
}

TEST_F(UnlearningFixture, ShortRunBoundsAndDeterminism) {
  std::mt19937_64 rng(21);
  const ParamVector w(RandomVector(kNumParams, -1.0, 1.0, rng));
  UnlearnConfig config;
  config.steps = 6;
  config.forget_batch = 4;
  config.anchor_batch = 6;
  config.seed = 3;
  const UnlearnResult a = Unlearn(spec_, prep_->data, prep_->partition, w, config);
  const UnlearnResult b = Unlearn(spec_, prep_->data, prep_->partition, w, config);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.objective_history, b.objective_history);
  EXPECT_EQ(a.objective_history.size(), 6u);
  EXPECT_EQ(a.w_orig, w);
  ExpectValidTarget(a.target);
  double max_delta = 0.0;
  for (std::size_t i = 0; i < a.param_delta.size(); ++i) {
    EXPECT_GE(a.param_delta[i], 0.0);
    EXPECT_EQ(a.param_delta[i], std::abs(a.params[i] - w[i]));
    max_delta = std::max(max_delta, a.param_delta[i]);
  }
  EXPECT_GT(max_delta, 0.0);
  EXPECT_LE(max_delta, kPi);
}

TEST_F(UnlearningFixture, UniformTargetSource) {
  UnlearnConfig config;
  config.steps = 0;
  config.target = TargetSource::kUniform;
  const UnlearnResult r =
      Unlearn(spec_, prep_->data, prep_->partition, ParamVector(), config);
  EXPECT_EQ(r.target.source, TargetSource::kUniform);
  EXPECT_EQ(r.target.q.probs, (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_STREQ(TargetSourceName(TargetSource::kUniform), "uniform");
}

}  // namespace
}  // namespace qmu
