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

#include <cmath>
#include <fstream>
#include <sstream>

#include "dwil/error.h"
#include "dwil/optimality.h"
#include "dwil/rng.h"

namespace dwil {
namespace {

Eigen::MatrixXd StartStates(const TrajectorySet& demos) {
  Eigen::MatrixXd out(demos.state_dim,
                      static_cast<Eigen::Index>(demos.TransitionCount()));
  Eigen::Index c = 0;
  for (const Trajectory& t : demos.trajectories) {
    for (int k = 0; k < t.Horizon(); ++k) out.col(c++) = t.states[k];
  }
  return out;
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

Action Policy::Act(const State& state) const {
  Eigen::MatrixXd s = state;
  return ActBatch(s).col(0);
}

Eigen::MatrixXd Policy::ActBatch(const Eigen::MatrixXd& states) const {
  return Denormalize(net.ForwardBatch(input_scaler.Apply(states)));
}

Eigen::MatrixXd Policy::Normalize(const Eigen::MatrixXd& actions) const {
  Eigen::VectorXd mid = 0.5 * (action_high + action_low);
  Eigen::VectorXd half = 0.5 * (action_high - action_low);
  Eigen::MatrixXd unit = (actions.colwise() - mid).array().colwise() / half.array();
  return unit.cwiseMax(-1.0).cwiseMin(1.0);
}

Eigen::MatrixXd Policy::Denormalize(const Eigen::MatrixXd& unit) const {
  Eigen::VectorXd mid = 0.5 * (action_high + action_low);
  Eigen::VectorXd half = 0.5 * (action_high - action_low);
  Eigen::MatrixXd a = (unit.array().colwise() * half.array()).matrix().colwise() + mid;
  // guard against rounding at the box edges
  return a.cwiseMax(action_low.replicate(1, a.cols()))
      .cwiseMin(action_high.replicate(1, a.cols()));
}

Policy InitPolicy(const EnvSpec& target, const TrajectorySet& demos,
                  const PolicyConfig& config) {
  Policy p;
  p.action_low = target.ActionLow();
  p.action_high = target.ActionHigh();
  p.input_scaler = demos.empty() ? FeatureScaler::Identity(target.StateDim())
                                 : FeatureScaler::Fit(StartStates(demos));
  p.net = DenseNet::Mlp(target.StateDim(), config.hidden, target.ActionDim(),
                        config.num_layers, Activation::kTanh, Activation::kTanh,
                        DeriveSeed(config.train.seed, "policy-init"));
  return p;
}

Eigen::MatrixXd RecoverActions(const InverseModel& model, const EnvSpec& target,
                               const TrajectorySet& demos) {
  model.CheckTarget(target);
  const int sd = target.StateDim();
  const Eigen::Index n = static_cast<Eigen::Index>(demos.TransitionCount());
  Eigen::MatrixXd from(sd, n), to(sd, n);
  Eigen::Index c = 0;
  for (const Trajectory& t : demos.trajectories) {
    for (int k = 0; k < t.Horizon(); ++k, ++c) {
      from.col(c) = t.states[k];
      to.col(c) = t.states[k + 1];
    }
  }
  Eigen::MatrixXd actions = model.InferBatch(from, to);
  for (Eigen::Index i = 0; i < actions.cols(); ++i) {
    actions.col(i) = ClipAction(target, actions.col(i));
  }
  return actions;
}

PolicyFit TrainPolicy(const TransitionDistribution& dist,
                      const TrajectorySet& demos,
                      const Eigen::MatrixXd& recovered, const EnvSpec& target,
                      const PolicyConfig& config) {
  if (recovered.cols() != static_cast<Eigen::Index>(dist.size())) {
    throw DimensionError("recovered actions do not match the distribution");
  }
  PolicyFit fit;
  fit.policy = InitPolicy(target, demos, config);
  const Policy& p = fit.policy;
  Eigen::MatrixXd inputs = p.input_scaler.Apply(StartStates(demos));
  Eigen::MatrixXd targets = p.Normalize(recovered);

  TrainConfig train = config.train;
  if (train.batches_per_epoch <= 0) {
    train.batches_per_epoch = static_cast<int>(
        (dist.SupportSize() + train.batch_size - 1) / train.batch_size);
  }
  Rng rng(DeriveSeed(config.train.seed, "policy-batches"));
  BatchSampler sampler = [&](Eigen::MatrixXd& x, Eigen::MatrixXd& y) {
    x.resize(inputs.rows(), train.batch_size);
    y.resize(targets.rows(), train.batch_size);
    for (int b = 0; b < train.batch_size; ++b) {
      size_t i = dist.SampleIndex(rng);
      x.col(b) = inputs.col(static_cast<Eigen::Index>(i));
      y.col(b) = targets.col(static_cast<Eigen::Index>(i));
    }
  };
  TrainResult r = TrainFromSampler(fit.policy.net, sampler, train);
  fit.policy.net = std::move(r.net);
  fit.loss_history = std::move(r.loss_history);
  return fit;
}

PolicyFit TrainPolicy(const TransitionDistribution& dist,
                      const TrajectorySet& demos, const InverseModel& model,
                      const EnvSpec& target, const PolicyConfig& config) {
  return TrainPolicy(dist, demos, RecoverActions(model, target, demos), target,
                     config);
}

EvalReport Evaluate(const Controller& controller, const EnvSpec& target,
                    int episodes, uint64_t seed) {
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  EvalReport report;
  report.episodes = episodes;
  for (int i = 0; i < episodes; ++i) {
    RolloutResult r = Rollout(target, controller, DeriveSeed(seed, i), false);
    report.returns.push_back(DiscountedReturn(target, r.trajectory, 1.0));
    report.terminations[std::string(ToString(r.termination))]++;
  }
  double sum = 0.0;
  for (double r : report.returns) sum += r;
  report.mean = sum / episodes;
  if (episodes > 1) {
    double ss = 0.0;
    for (double r : report.returns) ss += (r - report.mean) * (r - report.mean);
    report.stddev = std::sqrt(ss / (episodes - 1));
  }
  return report;
}

EvalReport Evaluate(const Policy& policy, const EnvSpec& target, int episodes,
                    uint64_t seed) {
  Controller c = [&policy](const State& s, int) { return policy.Act(s); };
  return Evaluate(c, target, episodes, seed);
}

std::string_view ToString(Variant variant) {
  switch (variant) {
    case Variant::kOurs: return "ours";
    case Variant::kFeasibilityOnly: return "feasibility_only";
    case Variant::kOptimalityOnly: return "optimality_only";
    case Variant::kNaive: return "naive";
    case Variant::kNone: return "none";
  }
  return "unknown";
}

Variant ParseVariant(std::string_view text) {
  for (Variant v : AllVariants()) {
    if (ToString(v) == text) return v;
  }
  throw ConfigError("unknown variant '" + std::string(text) +
                    "' (expected ours, feasibility_only, optimality_only, "
                    "naive or none)");
}

const std::vector<Variant>& AllVariants() {
  static const std::vector<Variant> kAll = {
      Variant::kOurs, Variant::kFeasibilityOnly, Variant::kOptimalityOnly,
      Variant::kNaive, Variant::kNone};
  return kAll;
}

std::vector<double> VariantWeights(Variant variant, const ScoreTable& scores) {
  const size_t n = scores.size();
  std::vector<double> w(n, 1.0);
  if (variant == Variant::kNone) return w;
  if (scores.w_o.size() != n || scores.w_o_naive.size() != n) {
    throw DimensionError("score table columns differ in length");
  }
  for (size_t i = 0; i < n; ++i) {
    switch (variant) {
      case Variant::kOurs: w[i] = scores.w_f[i] * scores.w_o[i]; break;
      case Variant::kFeasibilityOnly: w[i] = scores.w_f[i]; break;
      case Variant::kOptimalityOnly: w[i] = scores.w_o[i]; break;
      case Variant::kNaive: w[i] = scores.w_f[i] * scores.w_o_naive[i]; break;
      case Variant::kNone: break;
    }
  }
  return w;
}

VariantResult RunVariant(Variant variant, const ScoreTable& scores,
                         const TrajectorySet& demos,
                         const Eigen::MatrixXd& recovered,
                         const EnvSpec& target, const PolicyConfig& config,
                         int eval_episodes, uint64_t eval_seed) {
  std::vector<double> weights = variant == Variant::kNone
                                    ? std::vector<double>(demos.size(), 1.0)
                                    : VariantWeights(variant, scores);
  TransitionDistribution dist = BuildDistribution(weights, demos);
  VariantResult out;
  out.policy = TrainPolicy(dist, demos, recovered, target, config).policy;
  out.report = Evaluate(out.policy, target, eval_episodes, eval_seed);
  return out;
}

void SavePolicy(const std::filesystem::path& path, const Policy& policy) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "policy\n";
  WriteVector(out, "input_mean", policy.input_scaler.mean);
  WriteVector(out, "input_scale", policy.input_scaler.scale);
  WriteVector(out, "action_low", policy.action_low);
  WriteVector(out, "action_high", policy.action_high);
  WriteDenseNet(out, policy.net);
}

Policy LoadPolicy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "policy") throw FormatError("not a policy checkpoint");
  Policy p;
  p.input_scaler.mean = ReadVector(in, "input_mean");
  p.input_scaler.scale = ReadVector(in, "input_scale");
  p.action_low = ReadVector(in, "action_low");
  p.action_high = ReadVector(in, "action_high");
  p.net = ReadDenseNet(in);
  return p;
}

}  // namespace dwil
