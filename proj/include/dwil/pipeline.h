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

#ifndef DWIL_PIPELINE_H_
#define DWIL_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dwil/config.h"
#include "dwil/feasibility.h"
#include "dwil/imitation.h"
#include "dwil/invdyn.h"
#include "dwil/optimality.h"
#include "dwil/traj.h"

namespace dwil {

inline constexpr char kToolVersion[] = "dwil 0.1.0";

// round(ratio * total) per class, corrected by largest remainder so the
// counts sum to `total`. Ties go to the earlier class.
std::vector<int> MixtureCounts(const std::vector<double>& ratios, int total);

struct DemoData {
  TrajectorySet demos;     // no actions
  TrajectorySet feasible;  // random target rollouts with actions
};

// Demonstrations in source order: target-optimal, target-suboptimal,
// other-dynamics optimal.
DemoData GenerateDemos(const ExperimentConfig& config, uint64_t seed);

struct ScoreResult {
  InverseDynamicsModel model;
  FeasibilityCalibration calibration;
  std::vector<FeasibilityRecord> feasibility;
  std::vector<ReturnRecord> returns;
  RectifyTable rectify;
  double delta = 0.0;  // rectify radius used
  std::vector<OptimalityRecord> optimality;  // rectified
  ScoreTable table;
};

// Fits f_id, calibrates, and scores every demonstration.
ScoreResult ScoreDemos(const ExperimentConfig& config, const DemoData& data,
                       uint64_t seed);
// Re-scores with another calibration or sigma, keeping f_id.
ScoreResult Rescore(const ExperimentConfig& config, const DemoData& data,
                    ScoreResult base, uint64_t seed, bool recalibrate);

// id,source_tag,F,w_f,eta,f_rec,w_o,w
std::string ScoresCsv(const ScoreResult& scores, const TrajectorySet& demos);
// Rebuilds the score table from a scores CSV; naive w_o is recomputed
// against the global feasible maximum.
ScoreTable ParseScoresCsv(const std::string& text, double sigma);

struct ResultRow {
  std::string variant;
  uint64_t seed = 0;
  EvalReport report;
};

std::string ResultsCsvHeader();
std::string ResultsCsvRow(const ResultRow& row);

// Seed-level statistics of one variant.
struct VariantSummary {
  std::string variant;
  int n = 0;
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean over seeds
};
std::vector<VariantSummary> SummarizeResults(const std::vector<ResultRow>& rows);

// Trains and evaluates `variants` on one scored data set.
std::vector<ResultRow> TrainEvalVariants(const ExperimentConfig& config,
                                         const DemoData& data,
                                         const ScoreResult& scores,
                                         const std::vector<Variant>& variants,
                                         uint64_t seed);

struct SweepRow {
  std::string parameter;
  double factor = 1.0;
  double value = 0.0;
  uint64_t seed = 0;
  EvalReport report;
};

// ----- subcommands ----- //
//
// Each writes into `out` and merges its record into out/manifest.json.

void CmdGenDemos(const ExperimentConfig& config, const std::filesystem::path& out);
void CmdScore(const ExperimentConfig& config, const std::filesystem::path& out);
void CmdTrainEval(const ExperimentConfig& config, Variant variant,
                  const std::filesystem::path& out);
// Full pipeline per seed, every configured variant; writes ablation.csv and
// ablation_summary.csv.
std::vector<ResultRow> CmdAblate(const ExperimentConfig& config,
                                 const std::filesystem::path& out);
// Varies sigma or delta_s by the configured factors for the ours variant;
// writes sweep.csv.
std::vector<SweepRow> CmdSweep(const ExperimentConfig& config,
                               const std::filesystem::path& out);

}  // namespace dwil

#endif  // DWIL_PIPELINE_H_
