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

#ifndef DWIL_INVDYN_H_
#define DWIL_INVDYN_H_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dwil/densenet.h"
#include "dwil/env.h"
#include "dwil/traj.h"

namespace dwil {

// Maps a state transition (s, s_next) to an action of the target dynamics.
class InverseModel {
 public:
  virtual ~InverseModel() = default;
  virtual Action Infer(const State& state, const State& next) const = 0;
  // Columns are samples. The default loops over Infer.
  virtual Eigen::MatrixXd InferBatch(const Eigen::MatrixXd& states,
                                     const Eigen::MatrixXd& next_states) const;
  // Throws ConfigError if the model was built for different dynamics.
  virtual void CheckTarget(const EnvSpec& target) const = 0;
};

// Per-coordinate affine standardization.
struct FeatureScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static FeatureScaler Fit(const Eigen::MatrixXd& samples);
  static FeatureScaler Identity(int dim);
  Eigen::MatrixXd Apply(const Eigen::MatrixXd& samples) const;
  Eigen::MatrixXd Invert(const Eigen::MatrixXd& scaled) const;
};

// Learned inverse dynamics. The network sees the concatenation
// (s, s_next - s), standardized with statistics of the training data, and
// predicts the standardized action.
class InverseDynamicsModel : public InverseModel {
 public:
  EnvFamily family = EnvFamily::kDriving2D;
  DynamicsVariant variant = DynamicsVariant::kSlow;
  int state_dim = 0;
  int action_dim = 0;
  uint64_t train_seed = 0;
  FeatureScaler input_scaler;
  FeatureScaler output_scaler;
  DenseNet net;

  Action Infer(const State& state, const State& next) const override;
  Eigen::MatrixXd InferBatch(const Eigen::MatrixXd& states,
                             const Eigen::MatrixXd& next_states) const override;
  void CheckTarget(const EnvSpec& target) const override;

  Eigen::MatrixXd Features(const Eigen::MatrixXd& states,
                           const Eigen::MatrixXd& next_states) const;
};

// Exact inverse of a deterministic target, returning the closest action in
// the box when the transition is infeasible.
class AnalyticInverseModel : public InverseModel {
 public:
  explicit AnalyticInverseModel(EnvSpec target) : target_(std::move(target)) {}
  Action Infer(const State& state, const State& next) const override;
  void CheckTarget(const EnvSpec& target) const override;

 private:
  EnvSpec target_;
};

// The action producing `next` from `state` under the target dynamics, or
// nullopt if no action in the box does.
std::optional<Action> AnalyticInverse(const EnvSpec& target, const State& state,
                                      const State& next);

struct InverseDynamicsConfig {
  int hidden = 64;
  int num_layers = 8;
  TrainConfig train;
};

struct InverseDynamicsFit {
  InverseDynamicsModel model;
  std::vector<double> loss_history;
};

// Trains f_id on every (s_t, s_{t+1}) -> a_t triple pooled from `feasible`.
InverseDynamicsFit FitInverseDynamics(const EnvSpec& target,
                                      const TrajectorySet& feasible,
                                      const InverseDynamicsConfig& config);

// Target-achievable counterpart of `demo`: s'_0 = s_0 and, for t >= 1,
// s'_t = step(s'_{t-1}, f_id(s'_{t-1}, s_t)). Always runs the full length
// of `demo`; terminal flags are ignored. The result has no actions.
Trajectory Replay(const InverseModel& model, const EnvSpec& target,
                  const Trajectory& demo);

// Perturbation added to every post-step state during replay: independent
// uniform draws in [-delta_s, delta_s] per coordinate. Trajectory i of a
// batch uses DeriveSeed(seed, i).
struct ReplayPerturbation {
  double delta_s = 0.0;
  uint64_t seed = 0;
};

// Replays a batch in lockstep. Equivalent to calling Replay on each element
// when `perturbation` is null.
std::vector<Trajectory> ReplayAll(const InverseModel& model,
                                  const EnvSpec& target,
                                  const std::vector<Trajectory>& demos,
                                  const ReplayPerturbation* perturbation = nullptr);

// Checkpoint: <prefix>.net (densenet format) and <prefix>.meta (sidecar).
void SaveInverseDynamics(const std::filesystem::path& prefix,
                         const InverseDynamicsModel& model);
InverseDynamicsModel LoadInverseDynamics(const std::filesystem::path& prefix);

}  // namespace dwil

#endif  // DWIL_INVDYN_H_
