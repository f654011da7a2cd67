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

#include "dwil/weighting.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dwil/error.h"
#include "json.hpp"

namespace dwil {

std::vector<ScoredTrajectory> Combine(
    const std::vector<FeasibilityRecord>& feasibility,
    const std::vector<OptimalityRecord>& optimality) {
  if (feasibility.size() != optimality.size()) {
    throw DimensionError("feasibility and optimality scores differ in length");
  }
  std::vector<ScoredTrajectory> out(feasibility.size());
  for (size_t i = 0; i < out.size(); ++i) {
    if (feasibility[i].id != optimality[i].id) {
      throw DimensionError("score id mismatch at position " +
                           std::to_string(i));
    }
    out[i] = {feasibility[i].id, feasibility[i].w_f, optimality[i].w_o,
              feasibility[i].w_f * optimality[i].w_o};
  }
  return out;
}

std::vector<ScoredTrajectory> Combine(const std::vector<double>& w_f,
                                      const std::vector<double>& w_o) {
  if (w_f.size() != w_o.size()) {
    throw DimensionError("feasibility and optimality scores differ in length");
  }
  std::vector<ScoredTrajectory> out(w_f.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = {i, w_f[i], w_o[i], w_f[i] * w_o[i]};
  }
  return out;
}

size_t TransitionDistribution::SupportSize() const {
  return std::count_if(entries_.begin(), entries_.end(),
                       [](const Entry& e) { return e.probability > 0.0; });
}

double TransitionDistribution::Entropy() const {
  double h = 0.0;
  for (const Entry& e : entries_) {
    if (e.probability > 0.0) h -= e.probability * std::log(e.probability);
  }
  return h;
}

size_t TransitionDistribution::SampleIndex(Rng& rng) const {
  double u = Uniform(rng, 0.0, total_weight_);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) {
    // u rounded up to the total; take the last transition with mass
    it = std::lower_bound(cumulative_.begin(), cumulative_.end(), total_weight_);
  }
  return static_cast<size_t>(it - cumulative_.begin());
}

std::vector<size_t> TransitionDistribution::SampleIndices(size_t n,
                                                          uint64_t seed) const {
  Rng rng(seed);
  std::vector<size_t> out(n);
  for (size_t& i : out) i = SampleIndex(rng);
  return out;
}

TransitionDistribution BuildDistribution(const std::vector<double>& weights,
                                         const TrajectorySet& demos) {
  if (weights.size() != demos.size()) {
    throw DimensionError("one weight per trajectory required");
  }
  TransitionDistribution dist;
  double running = 0.0;
  for (size_t k = 0; k < demos.size(); ++k) {
    double w = weights[k];
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ConfigError("trajectory weights must be finite and non-negative");
    }
    for (int t = 0; t < demos[k].Horizon(); ++t) {
      dist.entries_.push_back({k, t, w, 0.0});
      running += w;
      dist.cumulative_.push_back(running);
    }
  }
  if (!(running > 0.0)) {
    throw EmptySupportError(
        "every transition has zero weight; loosen the feasibility thresholds "
        "or increase sigma");
  }
  dist.total_weight_ = running;
  for (auto& e : dist.entries_) e.probability = e.weight / running;
  return dist;
}

TransitionDistribution BuildDistribution(
    const std::vector<ScoredTrajectory>& scored, const TrajectorySet& demos) {
  std::vector<double> w(scored.size());
  for (size_t i = 0; i < scored.size(); ++i) w[i] = scored[i].w;
  return BuildDistribution(w, demos);
}

std::vector<std::pair<State, State>> Sample(const TransitionDistribution& dist,
                                            const TrajectorySet& demos,
                                            size_t n, uint64_t seed) {
  std::vector<std::pair<State, State>> out;
  out.reserve(n);
  for (size_t i : dist.SampleIndices(n, seed)) {
    const auto& e = dist.entries()[i];
    const Trajectory& t = demos[e.trajectory];
    out.emplace_back(t.states[e.step], t.states[e.step + 1]);
  }
  return out;
}

DistributionSummary Summarize(const TransitionDistribution& dist,
                              const TrajectorySet& demos) {
  DistributionSummary s;
  s.transitions = dist.size();
  s.support = dist.SupportSize();
  s.entropy = dist.Entropy();
  for (const auto& e : dist.entries()) {
    s.mass_by_source[std::string(ToString(demos[e.trajectory].source))] +=
        e.probability;
  }
  return s;
}

std::string SummaryJson(const DistributionSummary& summary) {
  nlohmann::ordered_json j;
  j["transitions"] = summary.transitions;
  j["support_size"] = summary.support;
  j["entropy"] = summary.entropy;
  nlohmann::ordered_json mass = nlohmann::ordered_json::object();
  for (const auto& [tag, m] : summary.mass_by_source) mass[tag] = m;
  j["mass_by_source"] = mass;
  return j.dump(2) + "\n";
}

}  // namespace dwil
