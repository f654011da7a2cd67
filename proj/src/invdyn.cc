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

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "dwil/error.h"
#include "dwil/rng.h"

namespace dwil {
namespace {

constexpr double kFeasibleTolerance = 1e-9;

Eigen::MatrixXd StackStates(const std::vector<const State*>& states, int dim) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(states.size()));
  for (size_t i = 0; i < states.size(); ++i) m.col(i) = *states[i];
  return m;
}

void WriteVector(std::ostream& out, const char* key, const Eigen::VectorXd& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << FormatDouble(v[i]);
  out << "\n";
}

Eigen::VectorXd ReadVector(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing '" + key + "' line");
  std::istringstream ss(line);
  std::string word;
  ss >> word;
  if (word != key) throw FormatError("expected '" + key + "', got '" + word + "'");
  std::vector<double> values;
  while (ss >> word) values.push_back(ParseDouble(word));
  return Eigen::Map<Eigen::VectorXd>(values.data(),
                                     static_cast<Eigen::Index>(values.size()));
}

}  // namespace

Eigen::MatrixXd InverseModel::InferBatch(const Eigen::MatrixXd& states,
                                         const Eigen::MatrixXd& next_states) const {
  Eigen::MatrixXd out;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    Action a = Infer(states.col(i), next_states.col(i));
    if (i == 0) out.resize(a.size(), states.cols());
    out.col(i) = a;
  }
  return out;
}

FeatureScaler FeatureScaler::Fit(const Eigen::MatrixXd& samples) {
  FeatureScaler s;
  const double n = static_cast<double>(samples.cols());
  s.mean = samples.rowwise().sum() / n;
  Eigen::MatrixXd centered = samples.colwise() - s.mean;
  s.scale = (centered.array().square().rowwise().sum() / n).sqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
    if (!(s.scale[i] > 1e-12)) s.scale[i] = 1.0;
  }
  return s;
}

FeatureScaler FeatureScaler::Identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::MatrixXd FeatureScaler::Apply(const Eigen::MatrixXd& samples) const {
  return (samples.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd FeatureScaler::Invert(const Eigen::MatrixXd& scaled) const {
  return (scaled.array().colwise() * scale.array()).matrix().colwise() + mean;
}

Eigen::MatrixXd InverseDynamicsModel::Features(
    const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states) const {
  Eigen::MatrixXd raw(2 * state_dim, states.cols());
  raw.topRows(state_dim) = states;
  raw.bottomRows(state_dim) = next_states - states;
  return input_scaler.Apply(raw);
}

Action InverseDynamicsModel::Infer(const State& state, const State& next) const {
  if (state.size() != state_dim || next.size() != state_dim) {
    throw DimensionError("inverse dynamics input dimension");
  }
  Eigen::MatrixXd s = state, n = next;
  return InferBatch(s, n).col(0);
}

Eigen::MatrixXd InverseDynamicsModel::InferBatch(
    const Eigen::MatrixXd& states, const Eigen::MatrixXd& next_states) const {
  return output_scaler.Invert(net.ForwardBatch(Features(states, next_states)));
}

void InverseDynamicsModel::CheckTarget(const EnvSpec& target) const {
  if (target.family != family || target.variant != variant) {
    throw ConfigError("inverse dynamics model trained for " +
                      std::string(ToString(family)) + "/" +
                      std::string(ToString(variant)) + " used with " +
                      std::string(ToString(target.family)) + "/" +
                      std::string(ToString(target.variant)));
  }
}

Action AnalyticInverseModel::Infer(const State& state, const State& next) const {
  Action a(1);
  if (target_.family == EnvFamily::kDriving2D) {
    a[0] = (next[2] - state[2]) / target_.dt;
  } else {
    a[0] = (next[0] - state[0]) / target_.dt;
  }
  return ClipAction(target_, a);
}

void AnalyticInverseModel::CheckTarget(const EnvSpec& target) const {
  if (target.family != target_.family || target.variant != target_.variant) {
    throw ConfigError("analytic inverse built for a different target");
  }
}

std::optional<Action> AnalyticInverse(const EnvSpec& target, const State& state,
                                      const State& next) {
  Action a(1);
  if (target.family == EnvFamily::kDriving2D) {
    double heading = state[2];
    double dx = DrivingSpeed(target) * std::cos(heading) * target.dt;
    double dy = DrivingSpeed(target) * std::sin(heading) * target.dt;
    if (std::abs(next[0] - state[0] - dx) > kFeasibleTolerance ||
        std::abs(next[1] - state[1] - dy) > kFeasibleTolerance) {
      return std::nullopt;
    }
    a[0] = (next[2] - state[2]) / target.dt;
  } else {
    const Reacher1JParams& p = target.reacher;
    if (std::abs(next[1] - state[1]) > kFeasibleTolerance ||
        std::abs(next[2] - state[2]) > kFeasibleTolerance) {
      return std::nullopt;
    }
    double lo = p.start_angle - p.joint_limit, hi = p.start_angle + p.joint_limit;
    if (next[0] < lo - kFeasibleTolerance || next[0] > hi + kFeasibleTolerance) {
      return std::nullopt;
    }
    a[0] = (next[0] - state[0]) / target.dt;
  }
  double tol = kFeasibleTolerance / target.dt;
  if (a[0] < target.ActionLow()[0] - tol || a[0] > target.ActionHigh()[0] + tol) {
    return std::nullopt;
  }
  return a;
}

InverseDynamicsFit FitInverseDynamics(const EnvSpec& target,
                                      const TrajectorySet& feasible,
                                      const InverseDynamicsConfig& config) {
  if (feasible.empty()) throw ConfigError("feasible sample set is empty");
  const int sd = target.StateDim(), ad = target.ActionDim();
  std::vector<const State*> from, to;
  std::vector<const Action*> actions;
  for (const Trajectory& t : feasible.trajectories) {
    if (!t.HasActions()) {
      throw InvalidTrajectoryError("feasible sample trajectory without actions");
    }
    t.Validate(sd, ad);
    for (int k = 0; k < t.Horizon(); ++k) {
      from.push_back(&t.states[k]);
      to.push_back(&t.states[k + 1]);
      actions.push_back(&t.actions[k]);
    }
  }
  InverseDynamicsFit fit;
  InverseDynamicsModel& model = fit.model;
  model.family = target.family;
  model.variant = target.variant;
  model.state_dim = sd;
  model.action_dim = ad;
  model.train_seed = config.train.seed;

  Eigen::MatrixXd s = StackStates(from, sd), n = StackStates(to, sd);
  Eigen::MatrixXd raw(2 * sd, s.cols());
  raw.topRows(sd) = s;
  raw.bottomRows(sd) = n - s;
  model.input_scaler = FeatureScaler::Fit(raw);
  Eigen::MatrixXd y(ad, s.cols());
  for (size_t i = 0; i < actions.size(); ++i) y.col(i) = *actions[i];
  model.output_scaler = FeatureScaler::Fit(y);

  Dataset data{model.input_scaler.Apply(raw), model.output_scaler.Apply(y)};
  DenseNet net = DenseNet::Mlp(2 * sd, config.hidden, ad, config.num_layers,
                               Activation::kRelu, Activation::kIdentity,
                               DeriveSeed(config.train.seed, "invdyn-init"));
  TrainResult trained = Train(std::move(net), data, config.train);
  model.net = std::move(trained.net);
  fit.loss_history = std::move(trained.loss_history);
  return fit;
}

Trajectory Replay(const InverseModel& model, const EnvSpec& target,
                  const Trajectory& demo) {
  return ReplayAll(model, target, {demo}).front();
}

std::vector<Trajectory> ReplayAll(const InverseModel& model, const EnvSpec& target,
                                  const std::vector<Trajectory>& demos,
                                  const ReplayPerturbation* perturbation) {
  model.CheckTarget(target);
  const int sd = target.StateDim();
  std::vector<Trajectory> out(demos.size());
  std::vector<Rng> rngs;
  size_t longest = 0;
  for (size_t i = 0; i < demos.size(); ++i) {
    const Trajectory& d = demos[i];
    if (d.states.size() < 2) {
      throw InvalidTrajectoryError("replay needs at least one transition");
    }
    out[i].states.reserve(d.states.size());
    out[i].states.push_back(d.states[0]);
    out[i].source = d.source;
    out[i].seed = d.seed;
    longest = std::max(longest, d.states.size());
    if (perturbation) rngs.emplace_back(DeriveSeed(perturbation->seed, i));
  }
  std::vector<size_t> active;
  Eigen::MatrixXd prev, next;
  for (size_t t = 1; t < longest; ++t) {
    active.clear();
    for (size_t i = 0; i < demos.size(); ++i) {
      if (t < demos[i].states.size()) active.push_back(i);
    }
    prev.resize(sd, static_cast<Eigen::Index>(active.size()));
    next.resize(sd, static_cast<Eigen::Index>(active.size()));
    for (size_t k = 0; k < active.size(); ++k) {
      prev.col(k) = out[active[k]].states.back();
      next.col(k) = demos[active[k]].states[t];
    }
    Eigen::MatrixXd actions = model.InferBatch(prev, next);
    for (size_t k = 0; k < active.size(); ++k) {
      Action a = actions.col(k);
      if (!a.allFinite()) {
        throw ReplayFailedError(static_cast<int>(t),
                                "inverse model produced a non-finite action at "
                                "step " + std::to_string(t));
      }
      State s = Step(target, prev.col(k), a).next;
      if (perturbation) {
        Rng& rng = rngs[active[k]];
        for (Eigen::Index c = 0; c < s.size(); ++c) {
          s[c] += Uniform(rng, -perturbation->delta_s, perturbation->delta_s);
        }
      }
      out[active[k]].states.push_back(std::move(s));
    }
  }
  return out;
}

void SaveInverseDynamics(const std::filesystem::path& prefix,
                         const InverseDynamicsModel& model) {
  std::filesystem::path net_path = prefix;
  net_path += ".net";
  std::filesystem::path meta_path = prefix;
  meta_path += ".meta";
  std::ofstream net_out(net_path);
  if (!net_out) throw Error("cannot write '" + net_path.string() + "'");
  WriteDenseNet(net_out, model.net);
  std::ofstream meta(meta_path);
  if (!meta) throw Error("cannot write '" + meta_path.string() + "'");
  meta << "invdyn family=" << ToString(model.family)
       << " variant=" << ToString(model.variant)
       << " state_dim=" << model.state_dim << " action_dim=" << model.action_dim
       << " train_seed=" << model.train_seed << "\n";
  WriteVector(meta, "input_mean", model.input_scaler.mean);
  WriteVector(meta, "input_scale", model.input_scaler.scale);
  WriteVector(meta, "output_mean", model.output_scaler.mean);
  WriteVector(meta, "output_scale", model.output_scaler.scale);
}

InverseDynamicsModel LoadInverseDynamics(const std::filesystem::path& prefix) {
  std::filesystem::path net_path = prefix;
  net_path += ".net";
  std::filesystem::path meta_path = prefix;
  meta_path += ".meta";
  std::ifstream meta(meta_path);
  if (!meta) throw Error("cannot open '" + meta_path.string() + "'");
  InverseDynamicsModel model;
  std::string line;
  std::getline(meta, line);
  std::istringstream ss(line);
  std::string word;
  ss >> word;
  if (word != "invdyn") throw FormatError("not an inverse dynamics sidecar");
  while (ss >> word) {
    auto eq = word.find('=');
    std::string key = word.substr(0, eq), value = word.substr(eq + 1);
    if (key == "family") model.family = ParseEnvFamily(value);
    else if (key == "variant") model.variant = ParseDynamicsVariant(value);
    else if (key == "state_dim") model.state_dim = std::stoi(value);
    else if (key == "action_dim") model.action_dim = std::stoi(value);
    else if (key == "train_seed") model.train_seed = std::stoull(value);
  }
  model.input_scaler.mean = ReadVector(meta, "input_mean");
  model.input_scaler.scale = ReadVector(meta, "input_scale");
  model.output_scaler.mean = ReadVector(meta, "output_mean");
  model.output_scaler.scale = ReadVector(meta, "output_scale");
  std::ifstream net_in(net_path);
  if (!net_in) throw Error("cannot open '" + net_path.string() + "'");
  model.net = ReadDenseNet(net_in);
  return model;
}

}  // namespace dwil
