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

#include "dwil/invdyn.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dwil/error.h"

namespace dwil {
namespace {

State S(double a, double b, double c) {
  State s(3);
  s << a, b, c;
  return s;
}

Action A(double a) {
  Action x(1);
  x << a;
  return x;
}

TrajectorySet Feasible(const EnvSpec& spec, int n, uint64_t seed) {
  return Collect(spec, RandomPolicyFactory(spec), n, true, seed,
                 SourceTag::kUnknown, SetRole::kFeasibleSamples);
}

InverseDynamicsConfig SmallConfig() {
  InverseDynamicsConfig cfg;
  cfg.hidden = 16;
  cfg.num_layers = 3;
  cfg.train.epochs = 3;
  cfg.train.batches_per_epoch = 5;
  cfg.train.seed = 4;
  return cfg;
}

// Returns NaN from the given step onward.
class BrokenModel : public InverseModel {
 public:
  explicit BrokenModel(int fail_at) : fail_at_(fail_at) {}
  Action Infer(const State&, const State&) const override {
    return A(++calls_ >= fail_at_ ? std::nan("") : 0.0);
  }
  void CheckTarget(const EnvSpec&) const override {}

 private:
  int fail_at_;
  mutable int calls_ = 0;
};

TEST(AnalyticInverseTest, RecoversGeneratingAction) {
  EnvSpec spec = DefaultDriving2D();
  State s = S(2.0, 4.0, 0.3);
  State next = Step(spec, s, A(0.7)).next;
  auto a = AnalyticInverse(spec, s, next);
  ASSERT_TRUE(a.has_value());
  EXPECT_NEAR((*a)[0], 0.7, 1e-12);
}

TEST(AnalyticInverseTest, FastTransitionInfeasibleOnSlowTarget) {
  EnvSpec slow = DefaultDriving2D(DynamicsVariant::kSlow);
  EnvSpec fast = DefaultDriving2D(DynamicsVariant::kFast);
  State s = S(2.0, 4.0, 0.3);
  EXPECT_FALSE(AnalyticInverse(slow, s, Step(fast, s, A(0.1)).next).has_value());
}

TEST(AnalyticInverseTest, SteeringBeyondLimitInfeasible) {
  EnvSpec spec = DefaultDriving2D();
  State s = S(2.0, 4.0, 0.3);
  State next = Step(spec, s, A(0.0)).next;
  next[2] = s[2] + 1.5 * spec.driving.steer_limit * spec.dt;
  EXPECT_FALSE(AnalyticInverse(spec, s, next).has_value());
}

TEST(AnalyticInverseTest, ReacherDirectionAndGoal) {
  EnvSpec ccw = DefaultReacher1J(DynamicsVariant::kCounterClockwise);
  State s = S(0.2, 0.1, 0.8);
  State up = Step(ccw, s, A(1.0)).next;
  ASSERT_TRUE(AnalyticInverse(ccw, s, up).has_value());
  EXPECT_NEAR((*AnalyticInverse(ccw, s, up))[0], 1.0, 1e-12);
  State down = s;
  down[0] -= 0.05;
  EXPECT_FALSE(AnalyticInverse(ccw, s, down).has_value());
  State moved_goal = up;
  moved_goal[1] += 0.01;
  EXPECT_FALSE(AnalyticInverse(ccw, s, moved_goal).has_value());
}

TEST(ReplayTest, AnalyticModelReproducesTargetTrajectory) {
  EnvSpec spec = DefaultDriving2D();
  AnalyticInverseModel model(spec);
  TrajectorySet demos = Feasible(spec, 20, 7);
  for (const Trajectory& t : demos.trajectories) {
    Trajectory r = Replay(model, spec, t);
    ASSERT_EQ(r.states.size(), t.states.size());
    EXPECT_FALSE(r.HasActions());
    EXPECT_EQ(r.states[0], t.states[0]);
    EXPECT_LT(MeanPairwiseDistance(t, r), 1e-12);
  }
}

TEST(ReplayTest, FastDemoDriftsOnSlowTarget) {
  EnvSpec slow = DefaultDriving2D(DynamicsVariant::kSlow);
  EnvSpec fast = DefaultDriving2D(DynamicsVariant::kFast);
  AnalyticInverseModel model(slow);
  Trajectory demo;
  demo.states = {S(1.0, 5.0, 0.0)};
  for (int t = 0; t < 20; ++t) demo.states.push_back(Step(fast, demo.states.back(), A(0.0)).next);
  Trajectory r = Replay(model, slow, demo);
  for (size_t t = 1; t < r.states.size(); ++t) {
    EXPECT_NEAR((r.states[t].head<2>() - r.states[t - 1].head<2>()).norm(), 0.1, 1e-12);
    EXPECT_NEAR((demo.states[t].head<2>() - demo.states[t - 1].head<2>()).norm(), 0.2, 1e-12);
    EXPECT_GT((demo.states[t] - r.states[t]).norm(),
              (demo.states[t - 1] - r.states[t - 1]).norm());
  }
}

TEST(ReplayTest, SingleTransition) {
  EnvSpec spec = DefaultDriving2D();
  Trajectory demo;
  demo.states = {S(1, 5, 0), S(1.1, 5, 0)};
  EXPECT_EQ(Replay(AnalyticInverseModel(spec), spec, demo).states.size(), 2u);
}

TEST(ReplayTest, NonFiniteOutputNamesStep) {
  EnvSpec spec = DefaultDriving2D();
  Trajectory demo;
  demo.states = {S(1, 5, 0), S(1.1, 5, 0), S(1.2, 5, 0), S(1.3, 5, 0), S(1.4, 5, 0)};
  BrokenModel model(3);
  try {
    Replay(model, spec, demo);
    FAIL() << "expected replay failure";
  } catch (const ReplayFailedError& e) {
    EXPECT_EQ(e.step(), 3);
  }
}

TEST(ReplayTest, BatchEqualsSingle) {
  EnvSpec spec = DefaultDriving2D();
  InverseDynamicsModel model = FitInverseDynamics(spec, Feasible(spec, 10, 1), SmallConfig()).model;
  TrajectorySet demos = Feasible(spec, 6, 2);
  std::vector<Trajectory> batch = ReplayAll(model, spec, demos.trajectories);
  for (size_t i = 0; i < demos.size(); ++i) {
    Trajectory single = Replay(model, spec, demos[i]);
    ASSERT_EQ(single.states.size(), batch[i].states.size());
    for (size_t t = 0; t < single.states.size(); ++t) {
      EXPECT_LT((single.states[t] - batch[i].states[t]).norm(), 1e-12);
    }
  }
}

TEST(ReplayTest, PerturbationBoundedAndSeeded) {
  EnvSpec spec = DefaultDriving2D();
  AnalyticInverseModel model(spec);
  TrajectorySet demos = Feasible(spec, 4, 3);
  ReplayPerturbation p{0.001, 5};
  auto a = ReplayAll(model, spec, demos.trajectories, &p);
  auto b = ReplayAll(model, spec, demos.trajectories, &p);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].states, b[i].states);
    EXPECT_EQ(a[i].states[0], demos[i].states[0]);
    EXPECT_GT(MeanPairwiseDistance(a[i], demos[i]), 0.0);
  }
}

TEST(FitInverseDynamicsTest, Errors) {
  EnvSpec spec = DefaultDriving2D();
  TrajectorySet empty;
  empty.role = SetRole::kFeasibleSamples;
  EXPECT_THROW(FitInverseDynamics(spec, empty, SmallConfig()), ConfigError);
  TrajectorySet no_actions = Feasible(spec, 3, 1);
  no_actions.trajectories[1].actions.clear();
  EXPECT_THROW(FitInverseDynamics(spec, no_actions, SmallConfig()), InvalidTrajectoryError);
}

TEST(FitInverseDynamicsTest, DeterministicAndTagged) {
  EnvSpec spec = DefaultDriving2D();
  TrajectorySet data = Feasible(spec, 10, 1);
  InverseDynamicsFit a = FitInverseDynamics(spec, data, SmallConfig());
  InverseDynamicsFit b = FitInverseDynamics(spec, data, SmallConfig());
  EXPECT_TRUE(a.model.net == b.model.net);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.model.net.input_dim(), 6);
  EXPECT_EQ(a.model.net.output_dim(), 1);
  EXPECT_NO_THROW(a.model.CheckTarget(spec));
  EXPECT_THROW(a.model.CheckTarget(DefaultDriving2D(DynamicsVariant::kFast)), ConfigError);
  EXPECT_THROW(a.model.CheckTarget(DefaultReacher1J()), ConfigError);
  EXPECT_THROW(Replay(a.model, DefaultDriving2D(DynamicsVariant::kFast), data[0]), ConfigError);
}

TEST(FitInverseDynamicsTest, CheckpointRoundTrip) {
  EnvSpec spec = DefaultReacher1J();
  InverseDynamicsModel m = FitInverseDynamics(spec, Feasible(spec, 5, 1), SmallConfig()).model;
  auto prefix = std::filesystem::temp_directory_path() / "dwil_invdyn_test";
  SaveInverseDynamics(prefix, m);
  InverseDynamicsModel back = LoadInverseDynamics(prefix);
  EXPECT_TRUE(back.net == m.net);
  EXPECT_EQ(back.family, m.family);
  EXPECT_EQ(back.variant, m.variant);
  EXPECT_EQ(back.train_seed, m.train_seed);
  EXPECT_EQ(back.input_scaler.mean, m.input_scaler.mean);
  EXPECT_EQ(back.output_scaler.scale, m.output_scaler.scale);
  State s = S(0.1, 0.2, 0.9), n = S(0.15, 0.2, 0.9);
  EXPECT_EQ(back.Infer(s, n), m.Infer(s, n));
}

}  // namespace
}  // namespace dwil
