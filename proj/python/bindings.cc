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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "dwil/config.h"
#include "dwil/error.h"
#include "dwil/feasibility.h"
#include "dwil/optimality.h"
#include "dwil/pipeline.h"
#include "dwil/weighting.h"

namespace py = pybind11;

namespace dwil {
namespace {

// Rows of `states` become trajectory states.
Trajectory FromMatrix(const Eigen::MatrixXd& states) {
  Trajectory t;
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    t.states.push_back(states.row(i).transpose());
  }
  return t;
}

Eigen::MatrixXd ToMatrix(const Trajectory& t) {
  Eigen::MatrixXd m(t.states.size(), t.states.empty() ? 0 : t.states[0].size());
  for (size_t i = 0; i < t.states.size(); ++i) m.row(i) = t.states[i].transpose();
  return m;
}

py::dict EvalToDict(const EvalReport& r) {
  py::dict d;
  d["mean"] = r.mean;
  d["std"] = r.stddev;
  d["episodes"] = r.episodes;
  d["returns"] = r.returns;
  d["terminations"] = r.terminations;
  return d;
}

std::vector<double> Rectify(const Eigen::VectorXd& eta, const Eigen::MatrixXd& s0,
                            const Eigen::VectorXd& w_f, double delta) {
  if (eta.size() != s0.rows() || eta.size() != w_f.size()) {
    throw DimensionError("eta, s0 rows and w_f must have equal length");
  }
  std::vector<ReturnRecord> records(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    records[i] = {static_cast<size_t>(i), eta[i], s0.row(i).transpose()};
  }
  if (delta <= 0) delta = DefaultRectifyRadius(records);
  RectifyTable table = RectifyTable::Build(
      records, std::vector<double>(w_f.data(), w_f.data() + w_f.size()), delta);
  std::vector<double> out;
  for (const auto& e : table.entries()) out.push_back(e.best_eta);
  return out;
}

std::vector<double> TransitionProbabilities(const std::vector<double>& weights,
                                            const std::vector<int>& lengths) {
  if (weights.size() != lengths.size()) {
    throw DimensionError("one length per weight required");
  }
  TrajectorySet set;
  for (int n : lengths) {
    Trajectory t;
    t.states.assign(n + 1, State::Zero(3));
    set.trajectories.push_back(std::move(t));
  }
  TransitionDistribution dist = BuildDistribution(weights, set);
  std::vector<double> p;
  for (const auto& e : dist.entries()) p.push_back(e.probability);
  return p;
}

EnvSpec EnvByName(const std::string& family, const std::string& variant) {
  EnvFamily f = ParseEnvFamily(family);
  EnvSpec spec = f == EnvFamily::kDriving2D ? DefaultDriving2D() : DefaultReacher1J();
  if (!variant.empty()) spec = WithVariant(spec, ParseDynamicsVariant(variant));
  spec.Validate();
  return spec;
}

}  // namespace
}  // namespace dwil

PYBIND11_MODULE(_core, m) {
  using namespace dwil;
  m.doc() = "Trajectory weighting for imitation from cross-dynamics demonstrations";
  m.attr("__version__") = kToolVersion;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<EmptySupportError>(m, "EmptySupportError", base);
  py::register_exception<CalibrationError>(m, "CalibrationError", base);
  py::register_exception<DimensionError>(m, "DimensionError", base);
  py::register_exception<StageError>(m, "StageError", base);

  py::class_<EnvSpec>(m, "EnvSpec")
      .def(py::init(&EnvByName), py::arg("family") = "driving2d",
           py::arg("variant") = "")
      .def_property_readonly("family", [](const EnvSpec& s) { return std::string(ToString(s.family)); })
      .def_property_readonly("variant", [](const EnvSpec& s) { return std::string(ToString(s.variant)); })
      .def_readwrite("horizon", &EnvSpec::horizon)
      .def_readwrite("dt", &EnvSpec::dt)
      .def_readwrite("gamma", &EnvSpec::gamma)
      .def("to_json", &EnvSpecToJson)
      .def_static("from_json", &ParseEnvSpec);

  m.def("reset", &Reset, py::arg("spec"), py::arg("seed"));
  m.def("step", [](const EnvSpec& spec, const State& s, const Action& a) {
    StepResult r = Step(spec, s, a);
    return py::make_tuple(r.next, std::string(ToString(r.termination)));
  }, py::arg("spec"), py::arg("state"), py::arg("action"));
  m.def("reward", &Reward, py::arg("spec"), py::arg("state"), py::arg("next"));
  m.def("optimal_action", &OptimalAction, py::arg("spec"), py::arg("state"));
  m.def("rollout_optimal", [](const EnvSpec& spec, uint64_t seed) {
    Controller c = [&spec](const State& s, int) { return OptimalAction(spec, s); };
    return ToMatrix(Rollout(spec, c, seed, false).trajectory);
  }, py::arg("spec"), py::arg("seed"));
  m.def("discounted_return", [](const EnvSpec& spec, const Eigen::MatrixXd& states,
                                double gamma) {
    return DiscountedReturn(spec, FromMatrix(states), gamma);
  }, py::arg("spec"), py::arg("states"), py::arg("gamma"));
  m.def("mean_pairwise_distance", [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return MeanPairwiseDistance(FromMatrix(a), FromMatrix(b));
  });

  m.def("feasibility_from_distance", [](double d, double d_min, double d_max) {
    FeasibilityCalibration c;
    c.d_min = d_min;
    c.d_max = d_max;
    c.Validate();
    return FeasibilityFromDistance(d, c);
  }, py::arg("distance"), py::arg("d_min"), py::arg("d_max"));
  m.def("optimality_score", &OptimalityScore, py::arg("eta"), py::arg("reference"),
        py::arg("sigma"));
  m.def("rectify", &Rectify, py::arg("eta"), py::arg("s0"), py::arg("w_f"),
        py::arg("delta") = 0.0,
        "Best feasible return within delta of each start (delta <= 0: default).");
  m.def("transition_probabilities", &TransitionProbabilities, py::arg("weights"),
        py::arg("lengths"));
  m.def("mixture_counts", &MixtureCounts, py::arg("ratios"), py::arg("total"));

  m.def("load_trajectories", [](const std::filesystem::path& path) {
    TrajectorySet set = LoadTrajectorySet(path);
    py::list out;
    for (const Trajectory& t : set.trajectories) {
      py::dict d;
      d["states"] = ToMatrix(t);
      d["source_tag"] = std::string(ToString(t.source));
      d["seed"] = t.seed;
      d["has_actions"] = t.HasActions();
      out.append(d);
    }
    return out;
  }, py::arg("path"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("driving", &DefaultDrivingExperiment)
      .def_static("reacher", &DefaultReacherExperiment)
      .def_static("load", [](const std::filesystem::path& p) { return LoadConfig(p); })
      .def_static("from_json", &ParseConfig)
      .def("to_json", &ConfigToJson)
      .def("validate", &ExperimentConfig::Validate)
      .def_readwrite("name", &ExperimentConfig::name)
      .def_readwrite("num_demos", &ExperimentConfig::num_demos)
      .def_readwrite("num_feasible", &ExperimentConfig::num_feasible)
      .def_readwrite("delta_s", &ExperimentConfig::delta_s)
      .def_readwrite("eval_episodes", &ExperimentConfig::eval_episodes)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("variants", &ExperimentConfig::variants)
      .def_property("sigma", [](const ExperimentConfig& c) { return c.optimality.sigma; },
                    [](ExperimentConfig& c, double v) { c.optimality.sigma = v; })
      .def_property_readonly("target", [](const ExperimentConfig& c) { return c.target; });

  m.def("gen_demos", &CmdGenDemos, py::arg("config"), py::arg("out"));
  m.def("score", &CmdScore, py::arg("config"), py::arg("out"));
  m.def("train_eval", [](const ExperimentConfig& c, const std::string& variant,
                         const std::filesystem::path& out) {
    CmdTrainEval(c, ParseVariant(variant), out);
  }, py::arg("config"), py::arg("variant"), py::arg("out"));
  m.def("ablate", [](const ExperimentConfig& c, const std::filesystem::path& out) {
    py::list rows;
    for (const ResultRow& r : CmdAblate(c, out)) {
      py::dict d = EvalToDict(r.report);
      d["variant"] = r.variant;
      d["seed"] = r.seed;
      rows.append(d);
    }
    return rows;
  }, py::arg("config"), py::arg("out"));
  m.def("sweep", [](const ExperimentConfig& c, const std::filesystem::path& out) {
    py::list rows;
    for (const SweepRow& r : CmdSweep(c, out)) {
      py::dict d = EvalToDict(r.report);
      d["parameter"] = r.parameter;
      d["factor"] = r.factor;
      d["value"] = r.value;
      d["seed"] = r.seed;
      rows.append(d);
    }
    return rows;
  }, py::arg("config"), py::arg("out"));
}
