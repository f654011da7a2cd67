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

#ifndef DWIL_FEASIBILITY_H_
#define DWIL_FEASIBILITY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dwil/env.h"
#include "dwil/invdyn.h"
#include "dwil/traj.h"

namespace dwil {

// Distance thresholds for normalizing replay distances into [0, 1].
struct FeasibilityCalibration {
  double d_min = 0.0;
  double d_max = 1.0;
  double delta_s = 0.0;
  uint64_t seed = 0;
  std::string source_fingerprint;  // of the feasible-sample set

  // Throws CalibrationError unless 0 <= d_min < d_max.
  void Validate() const;
};

// d_min: smallest replay distance over `feasible`. d_max: largest distance
// when every post-step replay state is perturbed uniformly in
// [-delta_s, delta_s] per coordinate.
FeasibilityCalibration Calibrate(const InverseModel& model,
                                 const EnvSpec& target,
                                 const TrajectorySet& feasible, double delta_s,
                                 uint64_t seed);

// 1 below d_min, 0 above d_max, linear in between (closed interval).
double FeasibilityFromDistance(double distance,
                               const FeasibilityCalibration& calibration);

// Mean L2 distance between `demo` and its replay.
double ReplayDistance(const InverseModel& model, const EnvSpec& target,
                      const Trajectory& demo);

double FeasibilityScore(const InverseModel& model, const EnvSpec& target,
                        const FeasibilityCalibration& calibration,
                        const Trajectory& demo);

struct FeasibilityRecord {
  size_t id = 0;
  double w_f = 0.0;
  double distance = 0.0;
};

// Scores every trajectory of `demos`, in order.
std::vector<FeasibilityRecord> ScoreSet(const InverseModel& model,
                                        const EnvSpec& target,
                                        const FeasibilityCalibration& calibration,
                                        const TrajectorySet& demos);

}  // namespace dwil

#endif  // DWIL_FEASIBILITY_H_
