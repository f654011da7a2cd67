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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `--only=1,5,7` restricts the run;
// `--work=DIR` sets the scratch directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dwil/config.h"
#include "dwil/densenet.h"
#include "dwil/error.h"
#include "dwil/feasibility.h"
#include "dwil/imitation.h"
#include "dwil/invdyn.h"
#include "dwil/optimality.h"
#include "dwil/pipeline.h"
#include "dwil/rng.h"
#include "dwil/weighting.h"

namespace dwil {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0,
                double d = 0) {
  char buffer[256];
  std::snprintf(buffer, sizeof(buffer), format, a, b, c, d);
  return buffer;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path g_work;

fs::path Scratch(const std::string& name) {
  fs::path p = g_work / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// 1. Closed-form score values.
Outcome ScoreExactness() {
  FeasibilityCalibration c;
  c.d_min = 0.25;
  c.d_max = 0.75;
  const double sigma = 100.0;
  double lo = FeasibilityFromDistance(0.25, c);
  double mid = FeasibilityFromDistance(0.5, c);
  double hi = FeasibilityFromDistance(0.75, c);
  double g0 = OptimalityScore(500.0, 500.0, sigma);
  double g1 = OptimalityScore(400.0, 500.0, sigma);
  double g3 = OptimalityScore(200.0, 500.0, sigma);
  bool pass = lo == 1.0 && mid == 0.5 && hi == 0.0 && g0 == 1.0 &&
              std::abs(g1 - std::exp(-0.5)) <= 1e-12 &&
              std::abs(g3 - std::exp(-4.5)) <= 1e-12;
  return {pass, Fmt("w_f(d_min,mid,d_max)=(%g,%g,%g)", lo, mid, hi) +
                    Fmt(" w_o(0,s,3s)=(%g,%.15g,%.15g)", g0, g1, g3)};
}

// 2. Analytic versus central-difference gradients, projected on random
// per-layer directions. Single coordinates can carry gradients below the
// resolution of a double-precision difference quotient; projections cannot.
// Sign pattern of every ReLU pre-activation and smooth-L1 residual region.
// The loss is smooth between two parameter points with equal patterns.
std::vector<bool> KinkPattern(const DenseNet& net, const Eigen::MatrixXd& x,
                              const Eigen::MatrixXd& y) {
  std::vector<bool> pattern;
  Eigen::MatrixXd a = x;
  for (const DenseLayer& l : net.layers()) {
    Eigen::MatrixXd z = (l.weight * a).colwise() + l.bias;
    switch (l.activation) {
      case Activation::kRelu:
        for (Eigen::Index k = 0; k < z.size(); ++k) pattern.push_back(z.data()[k] > 0);
        a = z.cwiseMax(0.0);
        break;
      case Activation::kTanh:
        a = z.array().tanh().matrix();
        break;
      case Activation::kIdentity:
        a = z;
        break;
    }
  }
  Eigen::MatrixXd r = a - y;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    pattern.push_back(r.data()[k] > 1.0);
    pattern.push_back(r.data()[k] < -1.0);
  }
  return pattern;
}

double GradientError(DenseNet net, uint64_t seed, int probes, int* skipped) {
  Rng rng(seed);
  const int batch = 8;
  Eigen::MatrixXd x(net.input_dim(), batch), y(net.output_dim(), batch);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = Gaussian(rng, 1.0);
  for (Eigen::Index k = 0; k < y.size(); ++k) y.data()[k] = Gaussian(rng, 1.5);
  const LossKind kind = LossKind::kSmoothL1;
  LossAndGradient lg = ComputeLossAndGradient(net, x, y, kind);
  const std::vector<bool> pattern = KinkPattern(net, x, y);
  const double h = 1e-5;
  double worst = 0.0;
  for (size_t l = 0; l < net.num_layers(); ++l) {
    DenseLayer& layer = net.mutable_layers()[l];
    const DenseLayer saved = layer;
    for (int p = 0; p < probes; ++p) {
      Eigen::MatrixXd dw(layer.weight.rows(), layer.weight.cols());
      Eigen::VectorXd db(layer.bias.size());
      for (Eigen::Index k = 0; k < dw.size(); ++k) dw.data()[k] = Gaussian(rng, 1.0);
      for (Eigen::Index k = 0; k < db.size(); ++k) db[k] = Gaussian(rng, 1.0);
      double norm = std::sqrt(dw.squaredNorm() + db.squaredNorm());
      dw /= norm;
      db /= norm;
      bool kink = false;
      auto at = [&](double t) {
        layer.weight = saved.weight + t * dw;
        layer.bias = saved.bias + t * db;
        double loss = ComputeLoss(net, x, y, kind);
        kink = kink || KinkPattern(net, x, y) != pattern;
        layer = saved;
        return loss;
      };
      double up = at(h), down = at(-h);
      double numeric = (up - down) / (2 * h);
      double analytic = lg.gradient.weight[l].cwiseProduct(dw).sum() +
                        lg.gradient.bias[l].dot(db);
      if (kink) {
        ++*skipped;
        continue;
      }
      double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-7});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

Outcome GradientOracle() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  double worst = 0.0;
  int skipped = 0, probes = 0;
  for (uint64_t draw = 0; draw < 20; ++draw) {
    DenseNet invdyn = DenseNet::Mlp(6, cfg.invdyn.hidden, 1, cfg.invdyn.num_layers,
                                    Activation::kRelu, Activation::kIdentity,
                                    DeriveSeed(draw, "invdyn-draw"));
    DenseNet policy = DenseNet::Mlp(3, cfg.policy.hidden, 1, cfg.policy.num_layers,
                                    Activation::kTanh, Activation::kTanh,
                                    DeriveSeed(draw, "policy-draw"));
    worst = std::max(worst, GradientError(invdyn, draw, 32, &skipped));
    worst = std::max(worst, GradientError(policy, draw, 32, &skipped));
    probes += 32 * static_cast<int>(invdyn.num_layers() + policy.num_layers());
  }
  return {worst < 1e-4 && skipped * 100 < probes,
          Fmt("max rel err %.3g over %g probes (%g at kinks)", worst, probes, skipped)};
}

// 3. Learned inverse dynamics against held-out truth and the analytic inverse.
Outcome InverseDynamicsFidelity() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  const EnvSpec& spec = cfg.target;
  DemoData data = GenerateDemos(cfg, 0);
  ScoreResult scored = ScoreDemos(cfg, data, 0);
  TrajectorySet held = Collect(spec, RandomPolicyFactory(spec), 200, true,
                               DeriveSeed(uint64_t{99}, "held-out"),
                               SourceTag::kUnknown, SetRole::kFeasibleSamples);
  double abs_sum = 0.0;
  int n = 0, agree = 0, analytic_n = 0;
  for (const Trajectory& t : held.trajectories) {
    for (size_t k = 0; k + 1 < t.states.size(); ++k) {
      Action a = scored.model.Infer(t.states[k], t.states[k + 1]);
      abs_sum += std::abs(a[0] - t.actions[k][0]);
      ++n;
      auto ref = AnalyticInverse(spec, t.states[k], t.states[k + 1]);
      if (!ref) continue;
      ++analytic_n;
      if (std::abs(a[0] - (*ref)[0]) <= 0.1 * spec.driving.steer_limit) ++agree;
    }
  }
  double mae = abs_sum / n;
  double frac = static_cast<double>(agree) / analytic_n;
  return {mae < 0.05 * spec.driving.steer_limit && frac >= 0.95,
          Fmt("MAE %.4f (limit %.3f) over %g transitions; analytic agreement %.4f",
              mae, 0.05 * spec.driving.steer_limit, n, frac)};
}

// 4. Demonstrator-variant demos score lower feasibility than target demos.
Outcome FeasibilitySeparation() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  bool pass = true;
  std::string detail;
  for (uint64_t seed : {0, 1, 2}) {
    DemoData data = GenerateDemos(cfg, seed);
    ScoreResult scored = ScoreDemos(cfg, data, seed);
    double other = 0.0, target = 0.0;
    int no = 0, nt = 0;
    for (size_t i = 0; i < data.demos.size(); ++i) {
      if (data.demos[i].source == SourceTag::kOtherDynamics) {
        other += scored.table.w_f[i];
        ++no;
      } else {
        target += scored.table.w_f[i];
        ++nt;
      }
    }
    other /= no;
    target /= nt;
    pass = pass && target - other >= 0.3;
    detail += Fmt("seed %g: slow %.3f fast %.3f; ", seed, target, other);
  }
  return {pass, detail};
}

// 5. Rectify table against a brute-force evaluation.
Outcome RectifyOracle() {
  Rng rng(5);
  int sets = 0, mismatches = 0;
  auto check = [&](const std::vector<ReturnRecord>& r, const std::vector<double>& w_f,
                   double delta) {
    RectifyTable table = RectifyTable::Build(r, w_f, delta);
    ++sets;
    for (size_t i = 0; i < r.size(); ++i) {
      double best = -std::numeric_limits<double>::infinity(), global = best;
      for (size_t j = 0; j < r.size(); ++j) {
        if (!(w_f[j] > 0)) continue;
        global = std::max(global, r[j].eta);
        double d2 = 0.0;
        for (Eigen::Index k = 0; k < r[i].s0.size(); ++k) {
          d2 += (r[i].s0[k] - r[j].s0[k]) * (r[i].s0[k] - r[j].s0[k]);
        }
        if (std::sqrt(d2) < delta) best = std::max(best, r[j].eta);
      }
      double expected = std::isfinite(best) ? best : global;
      if (table.entries()[i].best_eta != expected) ++mismatches;
    }
  };
  for (int trial = 0; trial < 300; ++trial) {
    size_t d = 1 + static_cast<size_t>(Uniform(rng, 0, 200));
    std::vector<ReturnRecord> r(d);
    std::vector<double> w_f(d);
    bool clustered = trial % 2 == 0;
    for (size_t i = 0; i < d; ++i) {
      r[i].id = i;
      r[i].eta = Uniform(rng, -500, 500);
      r[i].s0 = State(3);
      double cx = clustered ? 5.0 * (i % 3) : 0.0;
      r[i].s0 << cx + Uniform(rng, 0, 2), Uniform(rng, 0, 2), Uniform(rng, -1, 1);
      w_f[i] = Uniform(rng, 0, 1) < 0.3 ? 0.0 : Uniform(rng, 0, 1);
    }
    w_f[0] = 1.0;
    check(r, w_f, DefaultRectifyRadius(r));
    check(r, w_f, Uniform(rng, 0.05, 3.0));
  }
  // Real scored demo sets from both environments, truncated to 200.
  for (ExperimentConfig cfg : {DefaultDrivingExperiment(), DefaultReacherExperiment()}) {
    cfg.num_demos = 200;
    DemoData data = GenerateDemos(cfg, 0);
    ScoreResult scored = ScoreDemos(cfg, data, 0);
    check(scored.returns, scored.table.w_f, scored.delta);
  }
  return {mismatches == 0, Fmt("%g sets, %g mismatched entries", sets, mismatches)};
}

// 6. Far start region: rectified reference is local, naive is global.
Outcome RectifiedVersusNaive() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  const EnvSpec& spec = cfg.target;
  DemoData data = GenerateDemos(cfg, 0);
  ScoreResult scored = ScoreDemos(cfg, data, 0);
  const auto& regions = spec.driving.start_regions;
  size_t far = 0;
  auto center_dist = [&](const Rect& r) {
    return std::hypot(0.5 * (r.x_min + r.x_max) - spec.driving.goal_center[0],
                      0.5 * (r.y_min + r.y_max) - spec.driving.goal_center[1]);
  };
  for (size_t k = 1; k < regions.size(); ++k) {
    if (center_dist(regions[k]) > center_dist(regions[far])) far = k;
  }
  long best = -1;
  for (size_t i = 0; i < data.demos.size(); ++i) {
    const State& s0 = data.demos[i].states[0];
    if (scored.table.w_f[i] <= 0 || !regions[far].Contains(s0[0], s0[1])) continue;
    if (best < 0 || scored.returns[i].eta > scored.returns[best].eta) best = i;
  }
  if (best < 0) return {false, "no feasible demo starts in the far region"};
  double rect = scored.table.w_o[best], naive = scored.table.w_o_naive[best];
  return {rect == 1.0 && naive < 0.5,
          Fmt("far best eta %.1f, global max %.1f: rectified w_o %g, naive w_o %.4f",
              scored.returns[best].eta, scored.rectify.global_max(), rect, naive)};
}

// 7. Transition distribution normalization and sampling.
Outcome DistributionCorrectness() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  DemoData data = GenerateDemos(cfg, 0);
  ScoreResult scored = ScoreDemos(cfg, data, 0);
  std::vector<double> w = VariantWeights(Variant::kOurs, scored.table);
  TransitionDistribution dist = BuildDistribution(w, data.demos);
  double total = 0.0;
  for (const auto& e : dist.entries()) total += e.probability;
  const size_t n = 100000;
  std::vector<size_t> draws = dist.SampleIndices(n, 7);
  size_t zero_hits = 0;
  std::map<SourceTag, double> freq, mass;
  for (size_t i : draws) {
    if (dist.entries()[i].weight == 0.0) ++zero_hits;
    freq[data.demos[dist.entries()[i].trajectory].source] += 1.0 / n;
  }
  for (const auto& e : dist.entries()) mass[data.demos[e.trajectory].source] += e.probability;
  int outside = 0;
  auto within = [&](double f, double p) {
    double se = std::sqrt(p * (1 - p) / n);
    return p == 0.0 ? f == 0.0 : std::abs(f - p) < 3 * se;
  };
  for (const auto& [tag, p] : mass) outside += !within(freq[tag], p);
  // Per-entry check on a small distribution with mixed and zero weights.
  TrajectorySet small;
  small.state_dim = 3;
  for (int k = 0; k < 4; ++k) small.trajectories.push_back(data.demos[k]);
  for (auto& t : small.trajectories) t.states.resize(std::min<size_t>(t.states.size(), 4));
  TransitionDistribution sd = BuildDistribution(std::vector<double>{0.7, 0.0, 0.2, 1.5}, small);
  std::vector<double> counts(sd.size(), 0.0);
  for (size_t i : sd.SampleIndices(n, 8)) counts[i] += 1.0 / n;
  double small_total = 0.0;
  for (size_t k = 0; k < sd.size(); ++k) {
    small_total += sd.entries()[k].probability;
    outside += !within(counts[k], sd.entries()[k].probability);
    if (sd.entries()[k].weight == 0.0 && counts[k] > 0) ++zero_hits;
  }
  bool pass = std::abs(total - 1.0) <= 1e-9 && std::abs(small_total - 1.0) <= 1e-9 &&
              zero_hits == 0 && outside == 0;
  return {pass, Fmt("sum p - 1 = %.2g; zero-weight hits %g; cells outside 3 SE %g of %g",
                    total - 1.0, zero_hits, outside, mass.size() + sd.size())};
}

// Ablation summaries shared by criteria 8 and 9.
std::map<std::string, std::vector<VariantSummary>> g_ablation;

std::vector<VariantSummary> Ablate(const ExperimentConfig& base) {
  auto it = g_ablation.find(base.name);
  if (it != g_ablation.end()) return it->second;
  ExperimentConfig cfg = base;
  cfg.variants = {"ours", "none", "naive", "feasibility_only"};
  cfg.seeds = {0, 1, 2, 3, 4};
  std::vector<VariantSummary> s = SummarizeResults(CmdAblate(cfg, Scratch("ablate_" + cfg.name)));
  g_ablation[cfg.name] = s;
  return s;
}

const VariantSummary& Find(const std::vector<VariantSummary>& s, const std::string& v) {
  for (const auto& x : s) {
    if (x.variant == v) return x;
  }
  throw Error("missing variant " + v);
}

// 8. Ours beats each baseline by more than one pooled standard error.
Outcome EndToEndOrdering() {
  bool pass = true;
  std::string detail;
  for (const ExperimentConfig& cfg : {DefaultDrivingExperiment(), DefaultReacherExperiment()}) {
    std::vector<VariantSummary> s = Ablate(cfg);
    const VariantSummary& ours = Find(s, "ours");
    detail += cfg.name + Fmt(": ours %.1f+-%.1f", ours.mean, ours.se);
    for (const char* base : {"none", "naive", "feasibility_only"}) {
      const VariantSummary& b = Find(s, base);
      double pooled = std::sqrt(ours.se * ours.se + b.se * b.se);
      double gap = ours.mean - b.mean;
      pass = pass && gap > pooled;
      detail += std::string(", ") + base + Fmt(" %.1f (gap %.1f, SE %.1f)", b.mean, gap, pooled);
    }
    detail += "; ";
  }
  return {pass, detail};
}

// 9. Sigma sensitivity: stable over [sigma/10, 10 sigma], degraded at extremes.
Outcome SigmaSensitivity() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  std::vector<VariantSummary> s = Ablate(cfg);
  double gap = Find(s, "ours").mean - Find(s, "none").mean;
  cfg.sweep.parameter = "sigma";
  cfg.sweep.factors = {0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 1000.0};
  std::vector<SweepRow> rows = CmdSweep(cfg, Scratch("sweep_" + cfg.name));
  std::map<double, double> mean;
  for (const SweepRow& r : rows) mean[r.factor] += r.report.mean / cfg.seeds.size();
  double at_default = mean[1.0];
  double spread = 0.0;
  std::string detail = Fmt("ours-none gap %.1f; ours by factor:", gap);
  for (const auto& [f, m] : mean) {
    detail += Fmt(" %g:%.1f", f, m);
    if (f >= 0.1 && f <= 10.0) spread = std::max(spread, std::abs(m - at_default));
  }
  bool degraded = mean[0.01] < at_default && mean[1000.0] < at_default;
  detail += Fmt("; max change in range %.1f", spread);
  return {spread < gap && degraded, detail};
}

// 10. Rerun from the manifest reproduces scores.csv and results.csv bytes.
Outcome Reproducibility() {
  ExperimentConfig cfg = DefaultDrivingExperiment();
  cfg.seed = 3;
  fs::path a = Scratch("repro_a"), b = Scratch("repro_b");
  CmdGenDemos(cfg, a);
  CmdScore(cfg, a);
  for (Variant v : {Variant::kOurs, Variant::kNone}) CmdTrainEval(cfg, v, a);
  ExperimentConfig again = LoadConfig(a / "manifest.json");
  CmdGenDemos(again, b);
  CmdScore(again, b);
  for (Variant v : {Variant::kOurs, Variant::kNone}) CmdTrainEval(again, v, b);
  bool scores = Slurp(a / "scores.csv") == Slurp(b / "scores.csv");
  bool results = Slurp(a / "results.csv") == Slurp(b / "results.csv");
  return {scores && results && !Slurp(a / "scores.csv").empty(),
          std::string("scores.csv ") + (scores ? "identical" : "differs") +
              ", results.csv " + (results ? "identical" : "differs")};
}

}  // namespace
}  // namespace dwil

int main(int argc, char** argv) {
  using dwil::Outcome;
  std::set<int> only;
  dwil::g_work = std::filesystem::temp_directory_path() / "dwil_acceptance";
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--only=", 0) == 0) {
      std::stringstream ss(arg.substr(7));
      std::string item;
      while (std::getline(ss, item, ',')) only.insert(std::stoi(item));
    } else if (arg.rfind("--work=", 0) == 0) {
      dwil::g_work = arg.substr(7);
    } else {
      std::cerr << "usage: acceptance [--only=1,2,...] [--work=DIR]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"score-function exactness", dwil::ScoreExactness},
      {"gradient oracle", dwil::GradientOracle},
      {"inverse-dynamics fidelity", dwil::InverseDynamicsFidelity},
      {"feasibility separation", dwil::FeasibilitySeparation},
      {"rectify oracle", dwil::RectifyOracle},
      {"rectified vs naive divergence", dwil::RectifiedVersusNaive},
      {"distribution correctness", dwil::DistributionCorrectness},
      {"end-to-end ordering", dwil::EndToEndOrdering},
      {"sigma sensitivity", dwil::SigmaSensitivity},
      {"reproducibility", dwil::Reproducibility},
  };
  int failed = 0;
  for (size_t k = 0; k < criteria.size(); ++k) {
    int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("[%s] criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id,
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
