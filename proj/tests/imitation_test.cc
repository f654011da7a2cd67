// Copyright 2026 The dwil Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dwil/imitation.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dwil/config.h"
#include "dwil/error.h"
#include "dwil/weighting.h"

namespace dwil {
namespace {

ControllerFactory OptimalFactory(const EnvSpec& spec) {
  return [spec](uint64_t seed) {
    return MakeDemoPolicy(spec, DemoQuality::kOptimal, Corruption{}, seed);
  };
}

PolicyConfig TinyPolicy() {
  PolicyConfig cfg;
  cfg.hidden = 16;
  cfg.train.epochs = 3;
  cfg.train.batches_per_epoch = 3;
  cfg.train.batch_size = 32;
  cfg.train.seed = 9;
  return cfg;
}

// True actions of every transition, one column each, in distribution order.
Eigen::MatrixXd TrueActions(const TrajectorySet& demos) {
  Eigen::MatrixXd a(demos.action_dim, demos.TransitionCount());
  Eigen::Index col = 0;
  for (const Trajectory& t : demos.trajectories) {
    for (const Action& x : t.actions) a.col(col++) = x;
  }
  return a;
}

TEST(PolicyTest, OutputsStayInActionBox) {
  for (EnvSpec spec : {DefaultDriving2D(), DefaultReacher1J()}) {
    TrajectorySet demos = Collect(spec, OptimalFactory(spec), 5, false, 1);
    Policy policy = InitPolicy(spec, demos, TinyPolicy());
    // Large weights push the tanh output to saturation.
    for (auto& layer : policy.net.mutable_layers()) layer.weight *= 50.0;
    for (double a = -20; a <= 20; a += 1.0) {
      for (double b = -20; b <= 20; b += 1.0) {
        State s(3);
        s << a, b, 0.5 * a - b;
        Action act = policy.Act(s);
        EXPECT_GE(act[0], spec.ActionLow()[0]);
        EXPECT_LE(act[0], spec.ActionHigh()[0]);
      }
    }
  }
}

TEST(TrainPolicyTest, ZeroEpochsReturnsInitialization) {
  EnvSpec spec = DefaultDriving2D();
  TrajectorySet demos = Collect(spec, OptimalFactory(spec), 5, true, 1);
  TransitionDistribution dist = BuildDistribution(std::vector<double>(5, 1.0), demos);
  PolicyConfig cfg = TinyPolicy();
  cfg.train.epochs = 0;
  PolicyFit fit = TrainPolicy(dist, demos, TrueActions(demos), spec, cfg);
  EXPECT_TRUE(fit.policy.net == InitPolicy(spec, demos, cfg).net);
  EXPECT_TRUE(fit.loss_history.empty());
}

TEST(TrainPolicyTest, DeterministicForSeed) {
  EnvSpec spec = DefaultDriving2D();
  TrajectorySet demos = Collect(spec, OptimalFactory(spec), 5, true, 1);
  TransitionDistribution dist = BuildDistribution(std::vector<double>{1, 0.5, 0, 1, 1}, demos);
  PolicyFit a = TrainPolicy(dist, demos, TrueActions(demos), spec, TinyPolicy());
  PolicyFit b = TrainPolicy(dist, demos, TrueActions(demos), spec, TinyPolicy());
  EXPECT_TRUE(a.policy.net == b.policy.net);
  EXPECT_EQ(a.loss_history, b.loss_history);
  Eigen::MatrixXd wrong(1, 3);
  EXPECT_THROW(TrainPolicy(dist, demos, wrong, spec, TinyPolicy()), DimensionError);
}

TEST(RecoverActionsTest, AnalyticModelRecoversTrueActions) {
  EnvSpec spec = DefaultDriving2D();
  TrajectorySet demos = Collect(spec, OptimalFactory(spec), 10, true, 2);
  Eigen::MatrixXd rec = RecoverActions(AnalyticInverseModel(spec), spec, demos);
  ASSERT_EQ(rec.rows(), 1);
  ASSERT_EQ(rec.cols(), static_cast<Eigen::Index>(demos.TransitionCount()));
  EXPECT_LT((rec - TrueActions(demos)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(EvaluateTest, SingleEpisodeAndOrdering) {
  EnvSpec spec = DefaultDriving2D();
  Controller optimal = [&spec](const State& s, int) { return OptimalAction(spec, s); };
  EvalReport one = Evaluate(optimal, spec, 1, 3);
  EXPECT_EQ(one.episodes, 1);
  EXPECT_EQ(one.stddev, 0.0);
  EvalReport best = Evaluate(optimal, spec, 100, 3);
  EXPECT_GE(best.terminations["goal"], 95);
  EvalReport random = Evaluate(MakeRandomPolicy(spec, 4), spec, 100, 3);
  EXPECT_LT(random.mean, best.mean);
  EXPECT_EQ(best.returns.size(), 100u);
  EXPECT_EQ(Evaluate(optimal, spec, 10, 3).returns, Evaluate(optimal, spec, 10, 3).returns);
}

TEST(VariantWeightsTest, Definitions) {
  ScoreTable t{{1.0, 0.5, 0.0}, {0.2, 1.0, 1.0}, {0.1, 0.3, 0.9}};
  EXPECT_EQ(VariantWeights(Variant::kNone, t), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(VariantWeights(Variant::kFeasibilityOnly, t), t.w_f);
  EXPECT_EQ(VariantWeights(Variant::kOptimalityOnly, t), t.w_o);
  EXPECT_EQ(VariantWeights(Variant::kOurs, t), (std::vector<double>{0.2, 0.5, 0.0}));
  EXPECT_EQ(VariantWeights(Variant::kNaive, t), (std::vector<double>{0.1, 0.15, 0.0}));
  for (Variant v : AllVariants()) EXPECT_EQ(ParseVariant(ToString(v)), v);
  EXPECT_THROW(ParseVariant("best"), ConfigError);
}

TEST(PolicyCheckpointTest, RoundTrip) {
  EnvSpec spec = DefaultReacher1J();
  TrajectorySet demos = Collect(spec, OptimalFactory(spec), 3, false, 1);
  Policy p = InitPolicy(spec, demos, TinyPolicy());
  auto path = std::filesystem::temp_directory_path() / "dwil_policy_test.txt";
  SavePolicy(path, p);
  Policy q = LoadPolicy(path);
  EXPECT_TRUE(q.net == p.net);
  State s(3);
  s << 0.3, 0.2, 0.9;
  EXPECT_EQ(q.Act(s), p.Act(s));
}

// Behavior cloning on clean target demos approaches the demonstrator.
TEST(BehaviorCloningTest, OptimalDemosReachNearOptimalReturn) {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  const EnvSpec& spec = cfg.target;
  TrajectorySet demos = Collect(spec, OptimalFactory(spec), 300, true, 5);
  TransitionDistribution dist = BuildDistribution(std::vector<double>(demos.size(), 1.0), demos);
  PolicyFit fit = TrainPolicy(dist, demos, TrueActions(demos), spec, cfg.policy);
  Controller optimal = [&spec](const State& s, int) { return OptimalAction(spec, s); };
  double best = Evaluate(optimal, spec, 100, 6).mean;
  double got = Evaluate(fit.policy, spec, 100, 6).mean;
  EXPECT_GT(got, best - 0.15 * std::abs(best)) << "optimal " << best;
}

// Actions recovered by a learned inverse model train as well as true ones.
TEST(BehaviorCloningTest, RecoveredActionsMatchTrueActions) {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  const EnvSpec& spec = cfg.target;
  TrajectorySet feasible = Collect(spec, RandomPolicyFactory(spec), cfg.num_feasible,
                                   true, 7, SourceTag::kUnknown, SetRole::kFeasibleSamples);
  InverseDynamicsModel model = FitInverseDynamics(spec, feasible, cfg.invdyn).model;
  TrajectorySet demos = Collect(spec, OptimalFactory(spec), 300, true, 5);
  TransitionDistribution dist = BuildDistribution(std::vector<double>(demos.size(), 1.0), demos);
  Eigen::MatrixXd truth = TrueActions(demos);
  Eigen::MatrixXd recovered = RecoverActions(model, spec, demos);
  // Single policies vary by several percent across training seeds; compare
  // seed-averaged returns.
  double a = 0.0, b = 0.0;
  const int seeds = 3;
  for (int k = 0; k < seeds; ++k) {
    PolicyConfig pc = cfg.policy;
    pc.train.seed = k;
    a += Evaluate(TrainPolicy(dist, demos, truth, spec, pc).policy, spec, 100, 6).mean / seeds;
    b += Evaluate(TrainPolicy(dist, demos, recovered, spec, pc).policy, spec, 100, 6).mean / seeds;
  }
  EXPECT_LT(std::abs(a - b), 0.05 * std::abs(a)) << "true " << a << " recovered " << b;
}

}  // namespace
}  // namespace dwil
