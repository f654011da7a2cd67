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

#ifndef DWIL_TRAJ_H_
#define DWIL_TRAJ_H_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dwil {

using State = Eigen::VectorXd;
using Action = Eigen::VectorXd;

enum class SourceTag { kTargetOptimal, kTargetSuboptimal, kOtherDynamics, kUnknown };

std::string_view ToString(SourceTag tag);
SourceTag ParseSourceTag(std::string_view text);

// An ordered state sequence s_0..s_N with optional actions a_1..a_N.
// actions[t] is the action that moved states[t] to states[t + 1].
struct Trajectory {
  std::vector<State> states;
  std::vector<Action> actions;
  SourceTag source = SourceTag::kUnknown;
  uint64_t seed = 0;

  // number of transitions N
  int Horizon() const { return static_cast<int>(states.size()) - 1; }
  bool HasActions() const { return !actions.empty(); }

  // Throws InvalidTrajectoryError / DimensionError on violated invariants.
  // action_dim is only checked when actions are present.
  void Validate(int state_dim, int action_dim) const;

  // Copy without actions.
  Trajectory WithoutActions() const;
};

enum class SetRole { kDemonstrations, kFeasibleSamples };

std::string_view ToString(SetRole role);
SetRole ParseSetRole(std::string_view text);

struct TrajectorySet {
  SetRole role = SetRole::kDemonstrations;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<Trajectory> trajectories;

  size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
  const Trajectory& operator[](size_t i) const { return trajectories[i]; }

  // Checks every trajectory; feasible-sample sets must carry actions.
  void Validate() const;
  size_t TransitionCount() const;
};

// The N consecutive pairs (s_t, s_{t+1}).
std::vector<std::pair<State, State>> Transitions(const Trajectory& t);

// Mean L2 distance between aligned states over the common prefix.
double MeanPairwiseDistance(const Trajectory& x, const Trajectory& y);

// ----- text format ----- //
//
//   trajset role=<demonstrations|feasible-samples> count=<D> state_dim=<n>
//       action_dim=<m>
//   traj state_dim=<n> action_dim=<m> source_tag=<tag> seed=<s> steps=<N+1>
//       actions=<0|1>
//   <state values> [<action values>]      one line per state
//
// Header fields are written on one line each. Values use the shortest
// decimal form that round-trips to the same double. The last state line of
// a trajectory never carries an action.

void WriteTrajectorySet(std::ostream& out, const TrajectorySet& set);
TrajectorySet ReadTrajectorySet(std::istream& in);
void SaveTrajectorySet(const std::filesystem::path& path,
                       const TrajectorySet& set);
TrajectorySet LoadTrajectorySet(const std::filesystem::path& path);

// FNV-1a of the serialized set, as 16 hex digits.
std::string Fingerprint(const TrajectorySet& set);

// Shortest round-trip decimal representation.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

}  // namespace dwil

#endif  // DWIL_TRAJ_H_
