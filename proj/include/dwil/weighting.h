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

#ifndef DWIL_WEIGHTING_H_
#define DWIL_WEIGHTING_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dwil/feasibility.h"
#include "dwil/optimality.h"
#include "dwil/rng.h"
#include "dwil/traj.h"

namespace dwil {

struct ScoredTrajectory {
  size_t id = 0;
  double w_f = 0.0;
  double w_o = 0.0;
  double w = 0.0;  // w_f * w_o
};

// Elementwise product; throws DimensionError if the ids do not line up.
std::vector<ScoredTrajectory> Combine(
    const std::vector<FeasibilityRecord>& feasibility,
    const std::vector<OptimalityRecord>& optimality);
std::vector<ScoredTrajectory> Combine(const std::vector<double>& w_f,
                                      const std::vector<double>& w_o);

// Transition-level distribution: every transition of trajectory k carries
// the trajectory weight, normalized over all transitions.
class TransitionDistribution {
 public:
  struct Entry {
    size_t trajectory = 0;
    int step = 0;
    double weight = 0.0;
    double probability = 0.0;
  };

  const std::vector<Entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  double total_weight() const { return total_weight_; }
  size_t SupportSize() const;
  double Entropy() const;  // nats

  // Index into entries() by inverse CDF.
  size_t SampleIndex(Rng& rng) const;
  std::vector<size_t> SampleIndices(size_t n, uint64_t seed) const;

 private:
  friend TransitionDistribution BuildDistribution(
      const std::vector<double>& weights, const TrajectorySet& demos);
  std::vector<Entry> entries_;
  std::vector<double> cumulative_;  // running sums of weights
  double total_weight_ = 0.0;
};

// `weights` holds one weight per trajectory of `demos`. Throws
// EmptySupportError when every transition has zero weight.
TransitionDistribution BuildDistribution(const std::vector<double>& weights,
                                         const TrajectorySet& demos);
TransitionDistribution BuildDistribution(
    const std::vector<ScoredTrajectory>& scored, const TrajectorySet& demos);

// n independent transitions (s_t, s_{t+1}) drawn from `dist`.
std::vector<std::pair<State, State>> Sample(const TransitionDistribution& dist,
                                            const TrajectorySet& demos,
                                            size_t n, uint64_t seed);

struct DistributionSummary {
  size_t transitions = 0;
  size_t support = 0;
  double entropy = 0.0;
  std::map<std::string, double> mass_by_source;
};

DistributionSummary Summarize(const TransitionDistribution& dist,
                              const TrajectorySet& demos);
std::string SummaryJson(const DistributionSummary& summary);

}  // namespace dwil

#endif  // DWIL_WEIGHTING_H_
