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

#include "dwil/feasibility.h"

#include <algorithm>
#include <limits>

#include "dwil/error.h"

namespace dwil {

void FeasibilityCalibration::Validate() const {
  if (!(d_min >= 0.0) || !(d_max > d_min)) {
    throw CalibrationError(d_min, d_max,
                           "degenerate calibration: d_min=" +
                               FormatDouble(d_min) +
                               " d_max=" + FormatDouble(d_max));
  }
}

FeasibilityCalibration Calibrate(const InverseModel& model,
                                 const EnvSpec& target,
                                 const TrajectorySet& feasible, double delta_s,
                                 uint64_t seed) {
  if (feasible.empty()) throw ConfigError("feasible sample set is empty");
  if (!(delta_s >= 0.0)) throw ConfigError("delta_s must be non-negative");
  const std::vector<Trajectory>& samples = feasible.trajectories;
  std::vector<Trajectory> clean = ReplayAll(model, target, samples);
  ReplayPerturbation perturbation{delta_s, seed};
  std::vector<Trajectory> perturbed =
      ReplayAll(model, target, samples, &perturbation);

  FeasibilityCalibration c;
  c.d_min = std::numeric_limits<double>::infinity();
  c.d_max = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    c.d_min = std::min(c.d_min, MeanPairwiseDistance(samples[i], clean[i]));
    c.d_max = std::max(c.d_max, MeanPairwiseDistance(samples[i], perturbed[i]));
  }
  c.delta_s = delta_s;
  c.seed = seed;
  c.source_fingerprint = Fingerprint(feasible);
  c.Validate();
  return c;
}

double FeasibilityFromDistance(double distance,
                               const FeasibilityCalibration& calibration) {
  if (distance < calibration.d_min) return 1.0;
  if (distance > calibration.d_max) return 0.0;
  return 1.0 - (distance - calibration.d_min) /
                   (calibration.d_max - calibration.d_min);
}

double ReplayDistance(const InverseModel& model, const EnvSpec& target,
                      const Trajectory& demo) {
  return MeanPairwiseDistance(demo, Replay(model, target, demo));
}

double FeasibilityScore(const InverseModel& model, const EnvSpec& target,
                        const FeasibilityCalibration& calibration,
                        const Trajectory& demo) {
  return FeasibilityFromDistance(ReplayDistance(model, target, demo),
                                 calibration);
}

std::vector<FeasibilityRecord> ScoreSet(const InverseModel& model,
                                        const EnvSpec& target,
                                        const FeasibilityCalibration& calibration,
                                        const TrajectorySet& demos) {
  if (demos.empty()) throw ConfigError("demonstration set is empty");
  calibration.Validate();
  std::vector<Trajectory> replays = ReplayAll(model, target, demos.trajectories);
  std::vector<FeasibilityRecord> out(demos.size());
  for (size_t i = 0; i < demos.size(); ++i) {
    out[i].id = i;
    out[i].distance = MeanPairwiseDistance(demos[i], replays[i]);
    out[i].w_f = FeasibilityFromDistance(out[i].distance, calibration);
  }
  return out;
}

}  // namespace dwil
