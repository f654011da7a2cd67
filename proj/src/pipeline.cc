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

#include "dwil/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "dwil/error.h"
#include "dwil/rng.h"
#include "dwil/weighting.h"
#include "json.hpp"

namespace dwil {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

template <typename F>
auto RunStage(const char* stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

// Merges `update` into out/manifest.json together with the resolved config.
void UpdateManifest(const ExperimentConfig& config, const fs::path& out,
                    const char* stage, double seconds, const Json& update) {
  fs::path path = out / "manifest.json";
  Json m = Json::object();
  if (fs::exists(path)) m = Json::parse(ReadFile(path));
  m["manifest"] = kToolVersion;
  m["config"] = Json::parse(ConfigToJson(config));
  for (const auto& item : update.items()) m[item.key()] = item.value();
  m["timings"][stage] = seconds;
  WriteFile(path, m.dump(2) + "\n");
}

InverseDynamicsConfig SeededInvdyn(const ExperimentConfig& config,
                                   uint64_t seed) {
  InverseDynamicsConfig c = config.invdyn;
  c.train.seed = DeriveSeed(DeriveSeed(seed, "invdyn"), config.invdyn.train.seed);
  return c;
}

PolicyConfig SeededPolicy(const ExperimentConfig& config, uint64_t seed) {
  PolicyConfig c = config.policy;
  c.train.seed = DeriveSeed(DeriveSeed(seed, "policy"), config.policy.train.seed);
  return c;
}

// Returns, rectify table and optimality scores from existing w_f.
void ScoreOptimalityStage(const ExperimentConfig& config, const DemoData& data,
                          ScoreResult& r) {
  r.returns = ComputeReturns(config.target, data.demos, config.optimality.gamma);
  r.delta = config.optimality.delta > 0.0 ? config.optimality.delta
                                          : DefaultRectifyRadius(r.returns);
  std::vector<double> w_f(r.feasibility.size());
  for (size_t i = 0; i < w_f.size(); ++i) w_f[i] = r.feasibility[i].w_f;
  r.rectify = RectifyTable::Build(r.returns, w_f, r.delta);
  OptimalityConfig rect = config.optimality;
  rect.mode = OptimalityMode::kRectified;
  OptimalityConfig naive = rect;
  naive.mode = OptimalityMode::kNaive;
  r.optimality = ScoreOptimality(r.returns, r.rectify, rect);
  std::vector<OptimalityRecord> naive_scores =
      ScoreOptimality(r.returns, r.rectify, naive);
  r.table.w_f = w_f;
  r.table.w_o.resize(w_f.size());
  r.table.w_o_naive.resize(w_f.size());
  for (size_t i = 0; i < w_f.size(); ++i) {
    r.table.w_o[i] = r.optimality[i].w_o;
    r.table.w_o_naive[i] = naive_scores[i].w_o;
  }
}

void ScoreFeasibilityStage(const ExperimentConfig& config, const DemoData& data,
                           uint64_t seed, ScoreResult& r) {
  r.calibration = Calibrate(r.model, config.target, data.feasible,
                            config.delta_s, DeriveSeed(seed, "calibration"));
  r.feasibility = ScoreSet(r.model, config.target, r.calibration, data.demos);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string TerminationField(const EvalReport& r) {
  std::string s;
  for (const auto& [cause, count] : r.terminations) {
    if (!s.empty()) s += ';';
    s += cause + ":" + std::to_string(count);
  }
  return s;
}

Json CalibrationJson(const FeasibilityCalibration& c) {
  return {{"d_min", c.d_min},
          {"d_max", c.d_max},
          {"delta_s", c.delta_s},
          {"seed", c.seed},
          {"feasible_fingerprint", c.source_fingerprint}};
}

}  // namespace

std::vector<int> MixtureCounts(const std::vector<double>& ratios, int total) {
  if (total < 0) throw ConfigError("total count must be non-negative");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ConfigError("mixture ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mixture ratios must sum to 1");
  std::vector<int> counts(ratios.size());
  std::vector<double> remainder(ratios.size());
  int assigned = 0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    double exact = ratios[i] * total;
    counts[i] = static_cast<int>(std::floor(exact + 1e-9));
    remainder[i] = exact - counts[i];
    assigned += counts[i];
  }
  std::vector<size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainder[a] > remainder[b];
  });
  for (size_t k = 0; assigned < total; ++k, ++assigned) {
    counts[order[k % order.size()]]++;
  }
  for (size_t k = 0; assigned > total; ++k, --assigned) {
    counts[order[order.size() - 1 - k % order.size()]]--;
  }
  return counts;
}

DemoData GenerateDemos(const ExperimentConfig& config, uint64_t seed) {
  config.Validate();
  const EnvSpec& target = config.target;
  const EnvSpec demonstrator = config.Demonstrator();
  std::vector<int> counts = MixtureCounts(
      {config.mixture.optimal, config.mixture.suboptimal,
       config.mixture.other_dynamics},
      config.num_demos);

  ControllerFactory optimal = [&target](uint64_t s) {
    return MakeDemoPolicy(target, DemoQuality::kOptimal, Corruption{}, s);
  };
  ControllerFactory other = [&demonstrator](uint64_t s) {
    return MakeDemoPolicy(demonstrator, DemoQuality::kOptimal, Corruption{}, s);
  };
  const SuboptimalConfig& sub = config.suboptimal;
  ControllerFactory suboptimal = [&target, &sub](uint64_t s) {
    Rng rng(DeriveSeed(s, "level"));
    Corruption c = sub.corruption;
    c.level = sub.level_min + (sub.level_max - sub.level_min) * Uniform(rng, 0.0, 1.0);
    return MakeDemoPolicy(target, DemoQuality::kSuboptimal, c, s);
  };

  DemoData data;
  data.demos.role = SetRole::kDemonstrations;
  data.demos.state_dim = target.StateDim();
  data.demos.action_dim = target.ActionDim();
  auto append = [&data](TrajectorySet part) {
    for (Trajectory& t : part.trajectories) {
      data.demos.trajectories.push_back(t.WithoutActions());
    }
  };
  append(Collect(target, optimal, counts[0], false,
                 DeriveSeed(seed, "demos-optimal"), SourceTag::kTargetOptimal));
  append(Collect(target, suboptimal, counts[1], false,
                 DeriveSeed(seed, "demos-suboptimal"),
                 SourceTag::kTargetSuboptimal));
  append(Collect(demonstrator, other, counts[2], false,
                 DeriveSeed(seed, "demos-other"), SourceTag::kOtherDynamics));
  data.feasible = Collect(target, RandomPolicyFactory(target),
                          config.num_feasible, true, DeriveSeed(seed, "feasible"),
                          SourceTag::kUnknown, SetRole::kFeasibleSamples);
  return data;
}

ScoreResult ScoreDemos(const ExperimentConfig& config, const DemoData& data,
                       uint64_t seed) {
  config.Validate();
  ScoreResult r;
  r.model = RunStage("invdyn", [&] {
    return FitInverseDynamics(config.target, data.feasible,
                              SeededInvdyn(config, seed)).model;
  });
  RunStage("feasibility", [&] { ScoreFeasibilityStage(config, data, seed, r); });
  RunStage("optimality", [&] { ScoreOptimalityStage(config, data, r); });
  return r;
}

ScoreResult Rescore(const ExperimentConfig& config, const DemoData& data,
                    ScoreResult base, uint64_t seed, bool recalibrate) {
  config.Validate();
  if (recalibrate) {
    RunStage("feasibility",
             [&] { ScoreFeasibilityStage(config, data, seed, base); });
  }
  RunStage("optimality", [&] { ScoreOptimalityStage(config, data, base); });
  return base;
}

std::string ScoresCsv(const ScoreResult& scores, const TrajectorySet& demos) {
  std::ostringstream out;
  out << "id,source_tag,F,w_f,eta,f_rec,w_o,w\n";
  for (size_t i = 0; i < demos.size(); ++i) {
    const FeasibilityRecord& f = scores.feasibility[i];
    const OptimalityRecord& o = scores.optimality[i];
    out << i << ',' << ToString(demos[i].source) << ','
        << FormatDouble(f.distance) << ',' << FormatDouble(f.w_f) << ','
        << FormatDouble(o.eta) << ',' << FormatDouble(o.f_rec) << ','
        << FormatDouble(o.w_o) << ',' << FormatDouble(f.w_f * o.w_o) << '\n';
  }
  return out.str();
}

ScoreTable ParseScoresCsv(const std::string& text, double sigma) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "id,source_tag,F,w_f,eta,f_rec,w_o,w") {
    throw FormatError("scores CSV header mismatch");
  }
  ScoreTable t;
  std::vector<double> eta;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells = SplitCsv(line);
    if (cells.size() != 8) throw FormatError("scores CSV row needs 8 fields");
    t.w_f.push_back(ParseDouble(cells[3]));
    eta.push_back(ParseDouble(cells[4]));
    t.w_o.push_back(ParseDouble(cells[6]));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < eta.size(); ++i) {
    if (t.w_f[i] > 0.0) best = std::max(best, eta[i]);
  }
  for (double e : eta) {
    t.w_o_naive.push_back(std::isfinite(best) ? OptimalityScore(e, best, sigma)
                                              : 0.0);
  }
  return t;
}

std::string ResultsCsvHeader() {
  return "variant,seed,episodes,mean,std,terminations\n";
}

std::string ResultsCsvRow(const ResultRow& row) {
  std::ostringstream out;
  out << row.variant << ',' << row.seed << ',' << row.report.episodes << ','
      << FormatDouble(row.report.mean) << ',' << FormatDouble(row.report.stddev)
      << ',' << TerminationField(row.report) << '\n';
  return out.str();
}

std::vector<VariantSummary> SummarizeResults(const std::vector<ResultRow>& rows) {
  std::vector<VariantSummary> out;
  std::vector<std::vector<double>> values;
  for (const ResultRow& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const VariantSummary& s) {
      return s.variant == r.variant;
    });
    if (it == out.end()) {
      out.push_back({r.variant});
      values.emplace_back();
      it = out.end() - 1;
    }
    values[it - out.begin()].push_back(r.report.mean);
  }
  for (size_t k = 0; k < out.size(); ++k) {
    const std::vector<double>& v = values[k];
    out[k].n = static_cast<int>(v.size());
    out[k].mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - out[k].mean) * (x - out[k].mean);
      out[k].se = std::sqrt(ss / (v.size() - 1)) / std::sqrt(double(v.size()));
    }
  }
  return out;
}

std::vector<ResultRow> TrainEvalVariants(const ExperimentConfig& config,
                                         const DemoData& data,
                                         const ScoreResult& scores,
                                         const std::vector<Variant>& variants,
                                         uint64_t seed) {
  Eigen::MatrixXd recovered = RunStage("recover", [&] {
    return RecoverActions(scores.model, config.target, data.demos);
  });
  PolicyConfig policy = SeededPolicy(config, seed);
  std::vector<ResultRow> rows;
  for (Variant v : variants) {
    VariantResult r = RunStage("train-eval", [&] {
      return RunVariant(v, scores.table, data.demos, recovered, config.target,
                        policy, config.eval_episodes, DeriveSeed(seed, "eval"));
    });
    rows.push_back({std::string(ToString(v)), seed, std::move(r.report)});
  }
  return rows;
}

void CmdGenDemos(const ExperimentConfig& config, const fs::path& out) {
  auto start = std::chrono::steady_clock::now();
  DemoData data = RunStage("gen-demos", [&] {
    config.Validate();
    return GenerateDemos(config, config.seed);
  });
  fs::create_directories(out);
  SaveTrajectorySet(out / "demos.traj", data.demos);
  SaveTrajectorySet(out / "feasible.traj", data.feasible);
  std::vector<int> counts = MixtureCounts(
      {config.mixture.optimal, config.mixture.suboptimal,
       config.mixture.other_dynamics},
      config.num_demos);
  Json update;
  update["fingerprints"]["demos"] = Fingerprint(data.demos);
  update["fingerprints"]["feasible"] = Fingerprint(data.feasible);
  update["counts"] = {{"target-optimal", counts[0]},
                      {"target-suboptimal", counts[1]},
                      {"other-dynamics", counts[2]},
                      {"feasible-samples", config.num_feasible}};
  UpdateManifest(config, out, "gen-demos", Seconds(start), update);
}

namespace {

DemoData LoadDemoData(const fs::path& out) {
  fs::path demos = out / "demos.traj", feasible = out / "feasible.traj";
  if (!fs::exists(demos) || !fs::exists(feasible)) {
    throw Error("no demonstrations in '" + out.string() +
                "'; run gen-demos first");
  }
  return {LoadTrajectorySet(demos), LoadTrajectorySet(feasible)};
}

}  // namespace

void CmdScore(const ExperimentConfig& config, const fs::path& out) {
  auto start = std::chrono::steady_clock::now();
  DemoData data = RunStage("score", [&] { return LoadDemoData(out); });
  ScoreResult r = ScoreDemos(config, data, config.seed);
  RunStage("score", [&] {
    SaveInverseDynamics(out / "invdyn", r.model);
    WriteFile(out / "scores.csv", ScoresCsv(r, data.demos));
    TransitionDistribution dist =
        BuildDistribution(VariantWeights(Variant::kOurs, r.table), data.demos);
    WriteFile(out / "distribution.json", SummaryJson(Summarize(dist, data.demos)));
  });
  Json update;
  update["calibration"] = CalibrationJson(r.calibration);
  update["rectify_delta"] = r.delta;
  update["fingerprints"]["demos"] = Fingerprint(data.demos);
  update["fingerprints"]["feasible"] = Fingerprint(data.feasible);
  UpdateManifest(config, out, "score", Seconds(start), update);
}

void CmdTrainEval(const ExperimentConfig& config, Variant variant,
                  const fs::path& out) {
  auto start = std::chrono::steady_clock::now();
  DemoData data = RunStage("train-eval", [&] { return LoadDemoData(out); });
  ResultRow row = RunStage("train-eval", [&] {
    fs::path scores_path = out / "scores.csv";
    if (!fs::exists(out / "invdyn.net")) {
      throw Error("no inverse dynamics model in '" + out.string() +
                  "'; run score first");
    }
    ScoreTable table;
    if (variant != Variant::kNone) {
      if (!fs::exists(scores_path)) {
        throw Error("variant '" + std::string(ToString(variant)) +
                    "' needs scores.csv; run score first");
      }
      table = ParseScoresCsv(ReadFile(scores_path), config.optimality.sigma);
      if (table.size() != data.demos.size()) {
        throw Error("scores.csv does not match demos.traj");
      }
    }
    InverseDynamicsModel model = LoadInverseDynamics(out / "invdyn");
    Eigen::MatrixXd recovered = RecoverActions(model, config.target, data.demos);
    VariantResult r = RunVariant(variant, table, data.demos, recovered,
                                 config.target, SeededPolicy(config, config.seed),
                                 config.eval_episodes,
                                 DeriveSeed(config.seed, "eval"));
    SavePolicy(out / ("policy_" + std::string(ToString(variant)) + ".txt"),
               r.policy);
    return ResultRow{std::string(ToString(variant)), config.seed, r.report};
  });
  fs::path results = out / "results.csv";
  bool fresh = !fs::exists(results);
  std::ofstream csv(results, std::ios::app);
  if (fresh) csv << ResultsCsvHeader();
  csv << ResultsCsvRow(row);
  csv.close();
  UpdateManifest(config, out,
                 ("train-eval:" + std::string(ToString(variant))).c_str(),
                 Seconds(start), Json::object());
}

std::vector<ResultRow> CmdAblate(const ExperimentConfig& config,
                                 const fs::path& out) {
  auto start = std::chrono::steady_clock::now();
  config.Validate();
  if (config.variants.empty()) throw ConfigError("no variants to ablate");
  std::vector<Variant> variants;
  for (const std::string& v : config.variants) variants.push_back(ParseVariant(v));
  std::vector<ResultRow> rows;
  for (uint64_t seed : config.seeds) {
    auto t0 = std::chrono::steady_clock::now();
    DemoData data = RunStage("gen-demos", [&] { return GenerateDemos(config, seed); });
    ScoreResult scores = ScoreDemos(config, data, seed);
    std::vector<ResultRow> part = TrainEvalVariants(config, data, scores, variants, seed);
    for (const ResultRow& r : part) {
      std::cerr << config.name << " seed " << seed << " " << r.variant << " "
                << r.report.mean << "\n";
    }
    std::cerr << config.name << " seed " << seed << " took " << Seconds(t0)
              << " s\n";
    rows.insert(rows.end(), part.begin(), part.end());
  }
  fs::create_directories(out);
  std::string csv = ResultsCsvHeader();
  for (const ResultRow& r : rows) csv += ResultsCsvRow(r);
  WriteFile(out / "ablation.csv", csv);
  std::ostringstream summary;
  summary << "variant,n,mean,se\n";
  for (const VariantSummary& s : SummarizeResults(rows)) {
    summary << s.variant << ',' << s.n << ',' << FormatDouble(s.mean) << ','
            << FormatDouble(s.se) << '\n';
  }
  WriteFile(out / "ablation_summary.csv", summary.str());
  UpdateManifest(config, out, "ablate", Seconds(start), Json::object());
  return rows;
}

std::vector<SweepRow> CmdSweep(const ExperimentConfig& config,
                               const fs::path& out) {
  auto start = std::chrono::steady_clock::now();
  config.Validate();
  const bool sigma = config.sweep.parameter == "sigma";
  std::vector<SweepRow> rows;
  for (uint64_t seed : config.seeds) {
    DemoData data = RunStage("gen-demos", [&] { return GenerateDemos(config, seed); });
    ScoreResult base = ScoreDemos(config, data, seed);
    Eigen::MatrixXd recovered = RunStage("recover", [&] {
      return RecoverActions(base.model, config.target, data.demos);
    });
    PolicyConfig policy = SeededPolicy(config, seed);
    for (double factor : config.sweep.factors) {
      ExperimentConfig c = config;
      if (sigma) c.optimality.sigma *= factor;
      else c.delta_s *= factor;
      ScoreResult scored = Rescore(c, data, base, seed, !sigma);
      VariantResult r = RunStage("train-eval", [&] {
        return RunVariant(Variant::kOurs, scored.table, data.demos, recovered,
                          c.target, policy, c.eval_episodes,
                          DeriveSeed(seed, "eval"));
      });
      double value = sigma ? c.optimality.sigma : c.delta_s;
      std::cerr << config.name << " seed " << seed << " " << config.sweep.parameter
                << "=" << value << " " << r.report.mean << "\n";
      rows.push_back({config.sweep.parameter, factor, value, seed, r.report});
    }
  }
  fs::create_directories(out);
  std::ostringstream csv;
  csv << "parameter,factor,value,seed,episodes,mean,std\n";
  for (const SweepRow& r : rows) {
    csv << r.parameter << ',' << FormatDouble(r.factor) << ','
        << FormatDouble(r.value) << ',' << r.seed << ',' << r.report.episodes
        << ',' << FormatDouble(r.report.mean) << ','
        << FormatDouble(r.report.stddev) << '\n';
  }
  WriteFile(out / "sweep.csv", csv.str());
  UpdateManifest(config, out, "sweep", Seconds(start), Json::object());
  return rows;
}

}  // namespace dwil
