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

#ifndef DWIL_CONFIG_H_
#define DWIL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dwil/env.h"
#include "dwil/imitation.h"
#include "dwil/invdyn.h"
#include "dwil/optimality.h"

namespace dwil {

// Fractions of target-optimal, target-suboptimal and other-dynamics demos.
struct Mixture {
  double optimal = 0.3;
  double suboptimal = 0.6;
  double other_dynamics = 0.1;
};

// Suboptimal demos draw their corruption level uniformly from
// [level_min, level_max].
struct SuboptimalConfig {
  double level_min = 0.2;
  double level_max = 1.0;
  Corruption corruption;
};

struct SweepConfig {
  std::string parameter = "sigma";  // sigma or delta_s
  // multiples of the configured value
  std::vector<double> factors = {0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 1000.0};
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvSpec target;
  DynamicsVariant demonstrator_variant = DynamicsVariant::kFast;
  Mixture mixture;
  int num_demos = 1000;
  int num_feasible = 200;
  SuboptimalConfig suboptimal;
  InverseDynamicsConfig invdyn;
  PolicyConfig policy;
  OptimalityConfig optimality;
  double delta_s = 0.001;
  int eval_episodes = 100;
  uint64_t seed = 0;
  std::vector<std::string> variants = {"ours", "none", "naive",
                                       "feasibility_only"};
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4};
  SweepConfig sweep;
  std::string output_dir = "out";

  EnvSpec Demonstrator() const;
  // Throws ConfigError on violated invariants.
  void Validate() const;
};

ExperimentConfig DefaultDrivingExperiment();
ExperimentConfig DefaultReacherExperiment();

// Every field is written. Parsing accepts missing keys (defaults of the
// target family apply) and rejects unknown ones. A manifest is accepted in
// place of a config; its "config" member is used.
std::string ConfigToJson(const ExperimentConfig& config);
ExperimentConfig ParseConfig(std::string_view json_text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

std::string EnvSpecToJson(const EnvSpec& spec);
EnvSpec ParseEnvSpec(std::string_view json_text);

}  // namespace dwil

#endif  // DWIL_CONFIG_H_
