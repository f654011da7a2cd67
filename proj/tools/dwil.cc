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

// Command-line driver for the demonstration weighting pipeline.
//
//   dwil gen-demos  --config driving.json --out runs/a
//   dwil score      --config driving.json --out runs/a
//   dwil train-eval --config driving.json --out runs/a --variant ours
//   dwil ablate     --config driving.json --out runs/ablate
//   dwil sweep      --config driving.json --out runs/sweep
//
// --config also accepts a manifest.json written by an earlier run.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dwil/config.h"
#include "dwil/error.h"
#include "dwil/pipeline.h"

namespace {

struct Options {
  std::string config;
  std::optional<uint64_t> seed;
  std::string variant = "ours";
  std::string out;
};

void AddCommon(CLI::App* cmd, Options& opts) {
  cmd->add_option("--config", opts.config, "experiment config or manifest")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "master seed (overrides the config)");
  cmd->add_option("--out", opts.out, "output directory (overrides the config)");
}

dwil::ExperimentConfig Resolve(const Options& opts) {
  dwil::ExperimentConfig config;
  try {
    config = dwil::LoadConfig(opts.config);
  } catch (const dwil::Error& e) {
    throw dwil::StageError("config", e.what());
  }
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out.empty()) config.output_dir = opts.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted imitation from imperfect demonstrations"};
  app.require_subcommand(1);
  Options opts;
  CLI::App* gen = app.add_subcommand("gen-demos", "generate demonstrations and feasible samples");
  CLI::App* score = app.add_subcommand("score", "fit inverse dynamics and score demonstrations");
  CLI::App* train = app.add_subcommand("train-eval", "train and evaluate one variant");
  CLI::App* ablate = app.add_subcommand("ablate", "all variants over all configured seeds");
  CLI::App* sweep = app.add_subcommand("sweep", "sensitivity sweep of sigma or delta_s");
  for (CLI::App* cmd : {gen, score, train, ablate, sweep}) AddCommon(cmd, opts);
  train->add_option("--variant", opts.variant,
                    "ours, feasibility_only, optimality_only, naive or none");

  CLI11_PARSE(app, argc, argv);

  try {
    dwil::ExperimentConfig config = Resolve(opts);
    const std::filesystem::path out = config.output_dir;
    if (gen->parsed()) {
      dwil::CmdGenDemos(config, out);
    } else if (score->parsed()) {
      dwil::CmdScore(config, out);
    } else if (train->parsed()) {
      dwil::Variant variant;
      try {
        variant = dwil::ParseVariant(opts.variant);
      } catch (const dwil::Error& e) {
        throw dwil::StageError("config", e.what());
      }
      dwil::CmdTrainEval(config, variant, out);
    } else if (ablate->parsed()) {
      for (const auto& s : dwil::SummarizeResults(dwil::CmdAblate(config, out))) {
        std::cout << s.variant << " n=" << s.n << " mean=" << s.mean
                  << " se=" << s.se << "\n";
      }
    } else if (sweep->parsed()) {
      dwil::CmdSweep(config, out);
    }
  } catch (const std::exception& e) {
    std::cerr << "dwil: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
