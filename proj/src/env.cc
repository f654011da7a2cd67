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

#include "dwil/env.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "dwil/error.h"
#include "dwil/rng.h"

namespace dwil {
namespace {

constexpr double kPi = std::numbers::pi;

double WrapAngle(double angle) {
  angle = std::fmod(angle + kPi, 2.0 * kPi);
  if (angle < 0.0) angle += 2.0 * kPi;
  return angle - kPi;
}

// Liang-Barsky clip of segment p->q against an axis-aligned rectangle.
bool SegmentIntersectsRect(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                           const Rect& r) {
  double t0 = 0.0, t1 = 1.0;
  Eigen::Vector2d d = q - p;
  const double lo[2] = {r.x_min, r.y_min};
  const double hi[2] = {r.x_max, r.y_max};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (p[k] < lo[k] || p[k] > hi[k]) return false;
      continue;
    }
    double ta = (lo[k] - p[k]) / d[k];
    double tb = (hi[k] - p[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

void RequireFinite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidStateError(std::string("non-finite ") + what);
  }
}

// ----- driving ----- //

Termination DrivingTermination(const Driving2DParams& p, const State& s) {
  double x = s[0], y = s[1];
  if (!p.world.Contains(x, y)) return Termination::kOutOfBounds;
  if (p.obstacle.Contains(x, y)) return Termination::kObstacle;
  if ((Eigen::Vector2d(x, y) - p.goal_center).norm() <= p.goal_radius) {
    return Termination::kGoal;
  }
  return Termination::kNone;
}

Action DrivingOptimal(const EnvSpec& spec, const State& s) {
  const Driving2DParams& p = spec.driving;
  Eigen::Vector2d pos(s[0], s[1]);
  Eigen::Vector2d target = p.goal_center;
  const Rect& obs = p.obstacle;
  if (SegmentIntersectsRect(pos, target, obs.Inflated(0.5 * p.detour_margin))) {
    double cx = 0.5 * (obs.x_min + obs.x_max);
    double cy = 0.5 * (obs.y_min + obs.y_max);
    double wy = pos.y() >= cy ? obs.y_max + p.detour_margin
                              : obs.y_min - p.detour_margin;
    target = Eigen::Vector2d(cx, wy);
  }
  Eigen::Vector2d d = target - pos;
  double error = WrapAngle(std::atan2(d.y(), d.x()) - s[2]);
  Action a(1);
  a[0] = std::clamp(p.controller_gain * error, -p.steer_limit, p.steer_limit);
  return a;
}

// ----- reacher ----- //

double JointLow(const Reacher1JParams& p) { return p.start_angle - p.joint_limit; }
double JointHigh(const Reacher1JParams& p) { return p.start_angle + p.joint_limit; }

double AngularDistance(double a, double b) { return std::abs(WrapAngle(a - b)); }

Action ReacherOptimal(const EnvSpec& spec, const State& s) {
  const Reacher1JParams& p = spec.reacher;
  double phi = s[0];
  double goal_angle = std::atan2(s[2], s[1]);
  bool ccw = spec.Rotation() == RotationSign::kCounterClockwiseOnly;
  double lo = ccw ? phi : JointLow(p);
  double hi = ccw ? JointHigh(p) : phi;
  double target;
  // unwrap the goal angle to the first representative >= lo
  double unwrapped = lo + std::fmod(std::fmod(goal_angle - lo, 2.0 * kPi) +
                                        2.0 * kPi,
                                    2.0 * kPi);
  if (unwrapped <= hi) {
    target = unwrapped;
  } else {
    target = AngularDistance(lo, goal_angle) <= AngularDistance(hi, goal_angle)
                 ? lo
                 : hi;
  }
  Action a(1);
  a[0] = p.controller_gain * (target - phi);
  return ClipAction(spec, a);
}

}  // namespace

std::string_view ToString(EnvFamily family) {
  return family == EnvFamily::kDriving2D ? "driving2d" : "reacher1j";
}

std::string_view ToString(DynamicsVariant variant) {
  switch (variant) {
    case DynamicsVariant::kSlow:
      return "slow";
    case DynamicsVariant::kFast:
      return "fast";
    case DynamicsVariant::kClockwise:
      return "clockwise";
    case DynamicsVariant::kCounterClockwise:
      return "counterclockwise";
  }
  return "slow";
}

EnvFamily ParseEnvFamily(std::string_view text) {
  if (text == "driving2d") return EnvFamily::kDriving2D;
  if (text == "reacher1j") return EnvFamily::kReacher1J;
  throw ConfigError("unknown environment family '" + std::string(text) + "'");
}

DynamicsVariant ParseDynamicsVariant(std::string_view text) {
  if (text == "slow") return DynamicsVariant::kSlow;
  if (text == "fast") return DynamicsVariant::kFast;
  if (text == "clockwise") return DynamicsVariant::kClockwise;
  if (text == "counterclockwise") return DynamicsVariant::kCounterClockwise;
  throw ConfigError("unknown dynamics variant '" + std::string(text) + "'");
}

std::string_view ToString(Termination termination) {
  switch (termination) {
    case Termination::kNone:
      return "none";
    case Termination::kGoal:
      return "goal";
    case Termination::kObstacle:
      return "obstacle";
    case Termination::kOutOfBounds:
      return "out";
    case Termination::kHorizon:
      return "horizon";
  }
  return "none";
}

DemoQuality ParseDemoQuality(std::string_view text) {
  if (text == "optimal") return DemoQuality::kOptimal;
  if (text == "suboptimal") return DemoQuality::kSuboptimal;
  throw ConfigError("unsupported demonstration quality '" + std::string(text) +
                    "'");
}

RotationSign EnvSpec::Rotation() const {
  return variant == DynamicsVariant::kClockwise
             ? RotationSign::kClockwiseOnly
             : RotationSign::kCounterClockwiseOnly;
}

Action EnvSpec::ActionLow() const {
  Action a(1);
  if (family == EnvFamily::kDriving2D) {
    a[0] = -driving.steer_limit;
  } else {
    a[0] = Rotation() == RotationSign::kClockwiseOnly
               ? -reacher.angular_speed_limit
               : 0.0;
  }
  return a;
}

Action EnvSpec::ActionHigh() const {
  Action a(1);
  if (family == EnvFamily::kDriving2D) {
    a[0] = driving.steer_limit;
  } else {
    a[0] = Rotation() == RotationSign::kClockwiseOnly
               ? 0.0
               : reacher.angular_speed_limit;
  }
  return a;
}

void EnvSpec::Validate() const {
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must be in (0,1]");
  if (family == EnvFamily::kDriving2D) {
    if (variant != DynamicsVariant::kSlow && variant != DynamicsVariant::kFast) {
      throw ConfigError("driving2d variant must be slow or fast");
    }
    const Driving2DParams& p = driving;
    if (!(p.slow_speed > 0.0) || !(p.fast_speed > 0.0) || !(p.steer_limit > 0.0) || !(p.goal_radius > 0.0)) {
      throw ConfigError("driving2d speed, steer_limit and goal_radius must be > 0");
    }
    Rect goal_box{p.goal_center.x() - p.goal_radius,
                  p.goal_center.y() - p.goal_radius,
                  p.goal_center.x() + p.goal_radius,
                  p.goal_center.y() + p.goal_radius};
    if (goal_box.Intersects(p.obstacle)) {
      throw ConfigError("goal region and obstacle overlap");
    }
    auto inside = [&](const Rect& r) {
      return r.x_min >= p.world.x_min && r.x_max <= p.world.x_max &&
             r.y_min >= p.world.y_min && r.y_max <= p.world.y_max;
    };
    if (!inside(goal_box) || !inside(p.obstacle)) {
      throw ConfigError("goal and obstacle must lie inside the world bounds");
    }
    if (p.start_regions.empty()) throw ConfigError("no start region declared");
    for (const Rect& r : p.start_regions) {
      if (r.x_max < r.x_min || r.y_max < r.y_min || !inside(r)) {
        throw ConfigError("invalid start region");
      }
    }
    if (p.heading_max < p.heading_min) throw ConfigError("invalid heading range");
  } else {
    if (variant != DynamicsVariant::kClockwise &&
        variant != DynamicsVariant::kCounterClockwise) {
      throw ConfigError("reacher1j variant must be clockwise or counterclockwise");
    }
    const Reacher1JParams& p = reacher;
    if (!(p.link_length > 0.0) || !(p.angular_speed_limit > 0.0) ||
        !(p.joint_limit > 0.0) || !(p.goal_wedge_halfangle > 0.0)) {
      throw ConfigError("reacher1j parameters must be positive");
    }
  }
}

EnvSpec DefaultDriving2D(DynamicsVariant variant) {
  EnvSpec spec;
  spec.family = EnvFamily::kDriving2D;
  spec.variant = variant;
  spec.horizon = 100;
  spec.dt = 0.1;
  spec.gamma = 0.99;
  Driving2DParams& p = spec.driving;
  p.start_regions = {Rect{0.5, 4.0, 1.5, 6.0}, Rect{6.8, 3.5, 7.3, 6.5}};
  p.heading_min = -kPi / 6.0;
  p.heading_max = kPi / 6.0;
  return spec;
}

EnvSpec DefaultReacher1J(DynamicsVariant variant) {
  EnvSpec spec;
  spec.family = EnvFamily::kReacher1J;
  spec.variant = variant;
  spec.horizon = 80;
  spec.dt = 0.05;
  spec.gamma = 0.99;
  return spec;
}

EnvSpec WithVariant(const EnvSpec& spec, DynamicsVariant variant) {
  EnvSpec out = spec;
  out.variant = variant;
  return out;
}

double DrivingSpeed(const EnvSpec& spec) {
  return spec.variant == DynamicsVariant::kFast ? spec.driving.fast_speed
                                                 : spec.driving.slow_speed;
}

State Reset(const EnvSpec& spec, uint64_t seed) {
  Rng rng(seed);
  State s(3);
  if (spec.family == EnvFamily::kDriving2D) {
    const Driving2DParams& p = spec.driving;
    double total = 0.0;
    for (const Rect& r : p.start_regions) total += r.Area();
    double pick = Uniform(rng, 0.0, 1.0) * total;
    const Rect* region = &p.start_regions.back();
    for (const Rect& r : p.start_regions) {
      if (pick < r.Area()) {
        region = &r;
        break;
      }
      pick -= r.Area();
    }
    double ux = Uniform(rng, 0.0, 1.0);
    double uy = Uniform(rng, 0.0, 1.0);
    double uh = Uniform(rng, 0.0, 1.0);
    s[0] = region->x_min + ux * (region->x_max - region->x_min);
    s[1] = region->y_min + uy * (region->y_max - region->y_min);
    s[2] = p.heading_min + uh * (p.heading_max - p.heading_min);
  } else {
    const Reacher1JParams& p = spec.reacher;
    bool up = Uniform(rng, 0.0, 1.0) < 0.5;
    double depth = p.link_length * std::sqrt(Uniform(rng, 0.0, 1.0));
    double lateral = depth * std::tan(p.goal_wedge_halfangle) *
                     (2.0 * Uniform(rng, 0.0, 1.0) - 1.0);
    s[0] = p.start_angle;
    s[1] = lateral;
    s[2] = up ? depth : -depth;
  }
  return s;
}

Action ClipAction(const EnvSpec& spec, const Action& action) {
  return action.cwiseMax(spec.ActionLow()).cwiseMin(spec.ActionHigh());
}

StepResult Step(const EnvSpec& spec, const State& state, const Action& action) {
  if (state.size() != spec.StateDim()) throw DimensionError("state dimension");
  if (action.size() != spec.ActionDim()) throw DimensionError("action dimension");
  RequireFinite(state, "state");
  RequireFinite(action, "action");
  Action a = ClipAction(spec, action);
  StepResult result;
  result.next = state;
  if (spec.family == EnvFamily::kDriving2D) {
    const Driving2DParams& p = spec.driving;
    double heading = state[2];
    result.next[0] = state[0] + DrivingSpeed(spec) * std::cos(heading) * spec.dt;
    result.next[1] = state[1] + DrivingSpeed(spec) * std::sin(heading) * spec.dt;
    result.next[2] = heading + a[0] * spec.dt;
    result.termination = DrivingTermination(p, result.next);
  } else {
    const Reacher1JParams& p = spec.reacher;
    result.next[0] =
        std::clamp(state[0] + a[0] * spec.dt, JointLow(p), JointHigh(p));
  }
  return result;
}

double Reward(const EnvSpec& spec, const State& state, const State& next) {
  (void)state;
  if (spec.family == EnvFamily::kDriving2D) {
    const Driving2DParams& p = spec.driving;
    double x = next[0], y = next[1];
    bool goal = (Eigen::Vector2d(x, y) - p.goal_center).norm() <= p.goal_radius;
    bool obstacle = p.obstacle.Contains(x, y);
    bool out = !p.world.Contains(x, y);
    return p.alpha_goal * goal + p.alpha_obstacle * obstacle +
           p.alpha_out * out + p.alpha_step;
  }
  Eigen::Vector2d goal(next[1], next[2]);
  return -(EndEffector(spec, next) - goal).norm();
}

Eigen::Vector2d EndEffector(const EnvSpec& spec, const State& state) {
  double l = spec.reacher.link_length;
  return Eigen::Vector2d(l * std::cos(state[0]), l * std::sin(state[0]));
}

bool GoalWithinWedge(const EnvSpec& spec, double gx, double gy) {
  const Reacher1JParams& p = spec.reacher;
  double depth = std::abs(gy);
  if (depth > p.link_length * (1.0 + 1e-12)) return false;
  return std::abs(gx) <= depth * std::tan(p.goal_wedge_halfangle) * (1.0 + 1e-12);
}

bool SatisfiesInvariants(const EnvSpec& spec, const State& state) {
  if (state.size() != spec.StateDim() || !state.allFinite()) return false;
  if (spec.family == EnvFamily::kReacher1J) {
    const Reacher1JParams& p = spec.reacher;
    if (state[0] < JointLow(p) - 1e-12 || state[0] > JointHigh(p) + 1e-12) {
      return false;
    }
    return GoalWithinWedge(spec, state[1], state[2]);
  }
  return true;
}

Action OptimalAction(const EnvSpec& spec, const State& state) {
  return spec.family == EnvFamily::kDriving2D ? DrivingOptimal(spec, state)
                                              : ReacherOptimal(spec, state);
}

Controller MakeDemoPolicy(const EnvSpec& spec, DemoQuality quality,
                          const Corruption& corruption, uint64_t seed) {
  if (quality == DemoQuality::kOptimal) {
    return [spec](const State& s, int) { return OptimalAction(spec, s); };
  }
  struct CorruptedState {
    Rng rng;
    int noop_left = 0;
  };
  auto shared = std::make_shared<CorruptedState>();
  shared->rng.seed(seed);
  return [spec, corruption, shared](const State& s, int) {
    Action a = OptimalAction(spec, s);
    Action lo = spec.ActionLow(), hi = spec.ActionHigh();
    Rng& rng = shared->rng;
    double u_noop = Uniform(rng, 0.0, 1.0);
    double u_random = Uniform(rng, 0.0, 1.0);
    if (shared->noop_left > 0) {
      --shared->noop_left;
      return ClipAction(spec, Action::Zero(a.size()));
    }
    if (u_noop < corruption.level * corruption.noop_rate) {
      std::uniform_int_distribution<int> length(corruption.noop_min,
                                                corruption.noop_max);
      shared->noop_left = length(rng) - 1;
      return ClipAction(spec, Action::Zero(a.size()));
    }
    if (u_random < corruption.level) {
      for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = Uniform(rng, lo[k], hi[k]);
      return a;
    }
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      double half_width = 0.5 * (hi[k] - lo[k]);
      a[k] += corruption.level * corruption.noise_scale * half_width *
              Gaussian(rng, 1.0);
    }
    return ClipAction(spec, a);
  };
}

Controller MakeRandomPolicy(const EnvSpec& spec, uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [spec, rng](const State&, int) {
    Action lo = spec.ActionLow(), hi = spec.ActionHigh();
    Action a(lo.size());
    for (Eigen::Index k = 0; k < a.size(); ++k) a[k] = Uniform(*rng, lo[k], hi[k]);
    return a;
  };
}

ControllerFactory RandomPolicyFactory(const EnvSpec& spec) {
  return [spec](uint64_t seed) { return MakeRandomPolicy(spec, seed); };
}

RolloutResult Rollout(const EnvSpec& spec, const Controller& controller,
                      uint64_t reset_seed, bool record_actions) {
  RolloutResult result;
  Trajectory& traj = result.trajectory;
  traj.seed = reset_seed;
  State s = Reset(spec, reset_seed);
  traj.states.reserve(spec.horizon + 1);
  traj.states.push_back(s);
  result.termination = Termination::kHorizon;
  for (int t = 0; t < spec.horizon; ++t) {
    Action a = ClipAction(spec, controller(s, t));
    StepResult step = Step(spec, s, a);
    if (record_actions) traj.actions.push_back(a);
    traj.states.push_back(step.next);
    s = step.next;
    if (step.terminal()) {
      result.termination = step.termination;
      break;
    }
  }
  return result;
}

TrajectorySet Collect(const EnvSpec& spec, const ControllerFactory& factory,
                      int n, bool record_actions, uint64_t seed, SourceTag tag,
                      SetRole role) {
  if (n < 1) throw ConfigError("collect needs n >= 1");
  TrajectorySet set;
  set.role = role;
  set.state_dim = spec.StateDim();
  set.action_dim = spec.ActionDim();
  set.trajectories.reserve(n);
  for (int i = 0; i < n; ++i) {
    uint64_t rollout_seed = DeriveSeed(seed, static_cast<uint64_t>(i));
    Controller controller = factory(DeriveSeed(rollout_seed, uint64_t{1}));
    RolloutResult r = Rollout(spec, controller, rollout_seed, record_actions);
    r.trajectory.source = tag;
    set.trajectories.push_back(std::move(r.trajectory));
  }
  return set;
}

}  // namespace dwil
