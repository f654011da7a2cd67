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

#include "dwil/optimality.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dwil/error.h"

namespace dwil {

std::string_view ToString(OptimalityMode mode) {
  return mode == OptimalityMode::kRectified ? "rectified" : "naive";
}

OptimalityMode ParseOptimalityMode(std::string_view text) {
  if (text == "rectified") return OptimalityMode::kRectified;
  if (text == "naive") return OptimalityMode::kNaive;
  throw ConfigError("unknown optimality mode '" + std::string(text) + "'");
}

void OptimalityConfig::Validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ConfigError("optimality sigma must be positive");
  }
  if (!std::isfinite(delta)) throw ConfigError("rectify delta must be finite");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in (0, 1]");
  }
}

double DiscountedReturn(const EnvSpec& spec, const Trajectory& trajectory,
                        double gamma) {
  if (trajectory.states.size() < 2) {
    throw InvalidTrajectoryError("return needs at least one transition");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("discount must lie in [0, 1]");
  }
  double total = 0.0, discount = 1.0;
  for (size_t t = 0; t + 1 < trajectory.states.size(); ++t) {
    total += discount *
             Reward(spec, trajectory.states[t], trajectory.states[t + 1]);
    discount *= gamma;
  }
  return total;
}

std::vector<ReturnRecord> ComputeReturns(const EnvSpec& spec,
                                         const TrajectorySet& demos,
                                         double gamma) {
  std::vector<ReturnRecord> out(demos.size());
  for (size_t i = 0; i < demos.size(); ++i) {
    out[i].id = i;
    out[i].eta = DiscountedReturn(spec, demos[i], gamma);
    out[i].s0 = demos[i].states.front();
  }
  return out;
}

double DefaultRectifyRadius(const std::vector<ReturnRecord>& records) {
  double diameter = 0.0;
  for (size_t i = 0; i < records.size(); ++i) {
    for (size_t j = i + 1; j < records.size(); ++j) {
      diameter = std::max(diameter, (records[i].s0 - records[j].s0).norm());
    }
  }
  return diameter > 0.0 ? 0.1 * diameter : 1.0;
}

RectifyTable RectifyTable::Build(const std::vector<ReturnRecord>& records,
                                 const std::vector<double>& w_f, double delta) {
  if (records.size() != w_f.size()) {
    throw DimensionError("returns and feasibility scores differ in length");
  }
  if (!(delta > 0.0)) throw ConfigError("rectify delta must be positive");
  RectifyTable table;
  table.delta_ = delta;
  table.global_max_ = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < records.size(); ++i) {
    if (w_f[i] > 0.0) {
      table.feasible_.push_back(records[i]);
      table.global_max_ = std::max(table.global_max_, records[i].eta);
    }
  }
  if (table.feasible_.empty()) {
    throw EmptySupportError(
        "no feasible demonstration to rectify against; loosen the "
        "feasibility calibration");
  }
  table.entries_.reserve(records.size());
  for (const ReturnRecord& r : records) {
    Entry e{r.s0, table.Query(r.s0), false};
    e.fallback = true;
    for (const ReturnRecord& f : table.feasible_) {
      if ((f.s0 - r.s0).norm() < delta) {
        e.fallback = false;
        break;
      }
    }
    table.entries_.push_back(std::move(e));
  }
  return table;
}

double RectifyTable::Query(const State& s0) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const ReturnRecord& f : feasible_) {
    if ((f.s0 - s0).norm() < delta_) best = std::max(best, f.eta);
  }
  return std::isfinite(best) ? best : global_max_;
}

double OptimalityScore(double eta, double reference, double sigma) {
  double gap = eta - reference;
  return std::exp(-gap * gap / (2.0 * sigma * sigma));
}

std::vector<OptimalityRecord> ScoreOptimality(
    const std::vector<ReturnRecord>& records, const RectifyTable& table,
    const OptimalityConfig& config) {
  config.Validate();
  if (records.size() != table.entries().size()) {
    throw DimensionError("rectify table was built for a different record set");
  }
  std::vector<OptimalityRecord> out(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    out[i].id = records[i].id;
    out[i].eta = records[i].eta;
    out[i].f_rec = config.mode == OptimalityMode::kNaive
                       ? table.global_max()
                       : table.entries()[i].best_eta;
    out[i].w_o = OptimalityScore(out[i].eta, out[i].f_rec, config.sigma);
  }
  return out;
}

}  // namespace dwil
