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

#ifndef DWIL_ENV_H_
#define DWIL_ENV_H_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "dwil/traj.h"

namespace dwil {

enum class EnvFamily { kDriving2D, kReacher1J };

// Dynamics variants. Driving: slow / fast. Reacher: rotation direction.
enum class DynamicsVariant { kSlow, kFast, kClockwise, kCounterClockwise };

std::string_view ToString(EnvFamily family);
std::string_view ToString(DynamicsVariant variant);
EnvFamily ParseEnvFamily(std::string_view text);
DynamicsVariant ParseDynamicsVariant(std::string_view text);

struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool Contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  double Area() const { return (x_max - x_min) * (y_max - y_min); }
  Rect Inflated(double margin) const {
    return {x_min - margin, y_min - margin, x_max + margin, y_max + margin};
  }
  bool Intersects(const Rect& o) const {
    return x_min <= o.x_max && o.x_min <= x_max && y_min <= o.y_max &&
           o.y_min <= y_max;
  }
};

// State (x, y, heading); action is the heading rate. The car moves at fixed
// speed along its current heading.
struct Driving2DParams {
  // speed of the slow and fast variants
  double slow_speed = 1.0;
  double fast_speed = 2.0;
  double steer_limit = 1.0;
  Eigen::Vector2d goal_center = Eigen::Vector2d(8.5, 5.0);
  double goal_radius = 0.6;
  Rect obstacle{4.5, 3.0, 5.5, 7.0};
  Rect world{0.0, 0.0, 10.0, 10.0};
  // reset draws uniformly from the union (area weighted)
  std::vector<Rect> start_regions;
  double heading_min = 0.0;
  double heading_max = 0.0;
  // reward weights for goal, obstacle, out-of-bounds, and per step
  double alpha_goal = 100.0;
  double alpha_obstacle = -50.0;
  double alpha_out = -50.0;
  double alpha_step = -1.0;
  // hand-crafted controller: heading-error gain and obstacle clearance
  double controller_gain = 4.0;
  double detour_margin = 0.6;
};

enum class RotationSign { kClockwiseOnly, kCounterClockwiseOnly };

// State (joint angle, goal x, goal y); action is the joint rate.
struct Reacher1JParams {
  double link_length = 1.0;
  double start_angle = 0.0;
  // joint range is start_angle +- joint_limit
  double joint_limit = 150.0 * 3.14159265358979323846 / 180.0;
  // goals lie in two triangles with apex at the joint, axes along +-y
  double goal_wedge_halfangle = 0.46364760900080611;  // atan(0.5)
  double angular_speed_limit = 2.0;
  double controller_gain = 10.0;
};

struct EnvSpec {
  EnvFamily family = EnvFamily::kDriving2D;
  DynamicsVariant variant = DynamicsVariant::kSlow;
  int horizon = 100;
  double dt = 0.1;
  double gamma = 0.99;
  uint64_t seed = 0;
  Driving2DParams driving;
  Reacher1JParams reacher;

  int StateDim() const { return 3; }
  int ActionDim() const { return 1; }
  // Effective action box of this variant.
  Action ActionLow() const;
  Action ActionHigh() const;
  RotationSign Rotation() const;
  // Throws ConfigError on violated invariants.
  void Validate() const;
};

// Defaults for each family; the variant picks the dynamics.
EnvSpec DefaultDriving2D(DynamicsVariant variant = DynamicsVariant::kSlow);
EnvSpec DefaultReacher1J(
    DynamicsVariant variant = DynamicsVariant::kCounterClockwise);
// Same environment with the dynamics of another variant.
EnvSpec WithVariant(const EnvSpec& spec, DynamicsVariant variant);

// Forward speed of a driving2d variant.
double DrivingSpeed(const EnvSpec& spec);

enum class Termination { kNone, kGoal, kObstacle, kOutOfBounds, kHorizon };
std::string_view ToString(Termination termination);

struct StepResult {
  State next;
  Termination termination = Termination::kNone;
  bool terminal() const { return termination != Termination::kNone; }
};

State Reset(const EnvSpec& spec, uint64_t seed);
Action ClipAction(const EnvSpec& spec, const Action& action);
// Clips the action to the variant's box, then integrates one step.
StepResult Step(const EnvSpec& spec, const State& state, const Action& action);
double Reward(const EnvSpec& spec, const State& state, const State& next);

// Per-family state invariants (finite, dimensions, joint range, goal wedge).
bool SatisfiesInvariants(const EnvSpec& spec, const State& state);

// End-effector position of the reacher.
Eigen::Vector2d EndEffector(const EnvSpec& spec, const State& state);
bool GoalWithinWedge(const EnvSpec& spec, double gx, double gy);

// ----- controllers ----- //

// A closed-loop controller; called with the step index of the rollout.
using Controller = std::function<Action(const State&, int)>;
// Builds a fresh controller for one rollout from its seed.
using ControllerFactory = std::function<Controller(uint64_t)>;

enum class DemoQuality { kOptimal, kSuboptimal };
DemoQuality ParseDemoQuality(std::string_view text);

// Corruption applied to the hand-crafted controller. Each step, with
// probability `level` the action is replaced by a uniform draw from the box;
// otherwise it gets Gaussian noise of std `level * noise_scale * box_width/2`.
// No-op segments (zero action) start with probability `level * noop_rate`.
struct Corruption {
  double level = 0.0;
  double noise_scale = 0.5;
  double noop_rate = 0.05;
  int noop_min = 5;
  int noop_max = 15;
};

// Hand-crafted optimal action for this variant.
Action OptimalAction(const EnvSpec& spec, const State& state);

// Optimal controller, or the optimal controller under `corruption` when
// quality is suboptimal.
Controller MakeDemoPolicy(const EnvSpec& spec, DemoQuality quality,
                          const Corruption& corruption, uint64_t seed);
Controller MakeRandomPolicy(const EnvSpec& spec, uint64_t seed);

struct RolloutResult {
  Trajectory trajectory;
  Termination termination = Termination::kNone;
};

// Resets from `reset_seed` and runs until a terminal step or the horizon.
RolloutResult Rollout(const EnvSpec& spec, const Controller& controller,
                      uint64_t reset_seed, bool record_actions);

// n rollouts; rollout i uses DeriveSeed(seed, i) for reset and controller.
TrajectorySet Collect(const EnvSpec& spec, const ControllerFactory& factory,
                      int n, bool record_actions, uint64_t seed,
                      SourceTag tag = SourceTag::kUnknown,
                      SetRole role = SetRole::kDemonstrations);

// Factory for the uniform random policy.
ControllerFactory RandomPolicyFactory(const EnvSpec& spec);

}  // namespace dwil

#endif  // DWIL_ENV_H_
