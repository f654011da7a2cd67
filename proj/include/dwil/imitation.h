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

#ifndef DWIL_IMITATION_H_
#define DWIL_IMITATION_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dwil/densenet.h"
#include "dwil/env.h"
#include "dwil/invdyn.h"
#include "dwil/traj.h"
#include "dwil/weighting.h"

namespace dwil {

// Deterministic policy. The network ends in tanh, which is mapped affinely
// onto the action box, so outputs never leave it.
struct Policy {
  DenseNet net;
  FeatureScaler input_scaler;
  Action action_low;
  Action action_high;

  Action Act(const State& state) const;
  Eigen::MatrixXd ActBatch(const Eigen::MatrixXd& states) const;
  // Map between box actions and the network's [-1, 1] range.
  Eigen::MatrixXd Normalize(const Eigen::MatrixXd& actions) const;
  Eigen::MatrixXd Denormalize(const Eigen::MatrixXd& unit) const;
};

struct PolicyConfig {
  int hidden = 100;
  int num_layers = 3;
  TrainConfig train;

  PolicyConfig() {
    train.epochs = 200;
    train.batches_per_epoch = 10;
  }
};

// Untrained policy for `target`; the input scaler is fitted on every state
// of `demos`.
Policy InitPolicy(const EnvSpec& target, const TrajectorySet& demos,
                  const PolicyConfig& config);

// Actions recovered by the target inverse model for every transition of
// `demos`, in trajectory then step order (the order of a
// TransitionDistribution over the same set). Clipped to the target box.
Eigen::MatrixXd RecoverActions(const InverseModel& model, const EnvSpec& target,
                               const TrajectorySet& demos);

struct PolicyFit {
  Policy policy;
  std::vector<double> loss_history;
};

// Behavior cloning from observations: batches of transitions drawn from
// `dist`, regressed onto the recovered actions with the configured loss.
PolicyFit TrainPolicy(const TransitionDistribution& dist,
                      const TrajectorySet& demos,
                      const Eigen::MatrixXd& recovered, const EnvSpec& target,
                      const PolicyConfig& config);
PolicyFit TrainPolicy(const TransitionDistribution& dist,
                      const TrajectorySet& demos, const InverseModel& model,
                      const EnvSpec& target, const PolicyConfig& config);

struct EvalReport {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for one episode
  int episodes = 0;
  std::vector<double> returns;
  std::map<std::string, int> terminations;
};

// Undiscounted returns of `episodes` rollouts; episode i resets from
// DeriveSeed(seed, i).
EvalReport Evaluate(const Controller& controller, const EnvSpec& target,
                    int episodes, uint64_t seed);
EvalReport Evaluate(const Policy& policy, const EnvSpec& target, int episodes,
                    uint64_t seed);

enum class Variant { kOurs, kFeasibilityOnly, kOptimalityOnly, kNaive, kNone };
std::string_view ToString(Variant variant);
Variant ParseVariant(std::string_view text);
const std::vector<Variant>& AllVariants();

// Per-trajectory scores needed by every variant.
struct ScoreTable {
  std::vector<double> w_f;
  std::vector<double> w_o;        // rectified
  std::vector<double> w_o_naive;  // against the global feasible maximum

  size_t size() const { return w_f.size(); }
};

std::vector<double> VariantWeights(Variant variant, const ScoreTable& scores);

struct VariantResult {
  Policy policy;
  EvalReport report;
};

VariantResult RunVariant(Variant variant, const ScoreTable& scores,
                         const TrajectorySet& demos,
                         const Eigen::MatrixXd& recovered,
                         const EnvSpec& target, const PolicyConfig& config,
                         int eval_episodes, uint64_t eval_seed);

// ----- checkpoints ----- //
void SavePolicy(const std::filesystem::path& path, const Policy& policy);
Policy LoadPolicy(const std::filesystem::path& path);

}  // namespace dwil

#endif  // DWIL_IMITATION_H_
