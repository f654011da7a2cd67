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

#ifndef DWIL_OPTIMALITY_H_
#define DWIL_OPTIMALITY_H_

#include <string_view>
#include <vector>

#include "dwil/env.h"
#include "dwil/traj.h"

namespace dwil {

struct ReturnRecord {
  size_t id = 0;
  double eta = 0.0;  // discounted return
  State s0;
};

enum class OptimalityMode { kRectified, kNaive };
std::string_view ToString(OptimalityMode mode);
OptimalityMode ParseOptimalityMode(std::string_view text);

struct OptimalityConfig {
  double sigma = 100.0;
  // Neighborhood radius for f_rec; <= 0 selects DefaultRectifyRadius.
  double delta = 0.0;
  double gamma = 0.99;
  OptimalityMode mode = OptimalityMode::kRectified;

  void Validate() const;
};

// sum_t gamma^t R(s_t, s_{t+1}) over all transitions of `trajectory`.
double DiscountedReturn(const EnvSpec& spec, const Trajectory& trajectory,
                        double gamma);
std::vector<ReturnRecord> ComputeReturns(const EnvSpec& spec,
                                         const TrajectorySet& demos,
                                         double gamma);

// 10% of the largest L2 distance between two initial states; 1 when all
// initial states coincide.
double DefaultRectifyRadius(const std::vector<ReturnRecord>& records);

// Best feasible return near each initial state.
class RectifyTable {
 public:
  struct Entry {
    State s0;
    double best_eta = 0.0;
    bool fallback = false;  // neighborhood held no feasible record
  };

  // Throws EmptySupportError if no record has w_f > 0.
  static RectifyTable Build(const std::vector<ReturnRecord>& records,
                            const std::vector<double>& w_f, double delta);

  // Max eta over feasible records with ||s0' - s0|| < delta, or the global
  // feasible maximum when there is none.
  double Query(const State& s0) const;
  double global_max() const { return global_max_; }
  double delta() const { return delta_; }
  // One entry per record passed to Build, in order.
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  double delta_ = 0.0;
  double global_max_ = 0.0;
  std::vector<ReturnRecord> feasible_;
  std::vector<Entry> entries_;
};

// exp(-(eta - reference)^2 / (2 sigma^2))
double OptimalityScore(double eta, double reference, double sigma);

struct OptimalityRecord {
  size_t id = 0;
  double eta = 0.0;
  double f_rec = 0.0;  // reference return actually used
  double w_o = 0.0;
};

// Scores every record against the table's per-record reference, or against
// the global feasible maximum in naive mode.
std::vector<OptimalityRecord> ScoreOptimality(
    const std::vector<ReturnRecord>& records, const RectifyTable& table,
    const OptimalityConfig& config);

}  // namespace dwil

#endif  // DWIL_OPTIMALITY_H_
