/*
 * Copyright 2026 The drltr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line harness: run, sweep-clip, sweep-bias and plot-data.
//
//   drltr run --n 1000 10000 --repeats 2 --estimators ips dr
//   drltr sweep-clip --multipliers 0.001 1 1000
//   drltr --config desk.toml sweep-bias --z-grid 0 0.5 1
//   drltr plot-data --input results/run.csv --kind learning_curve
//
// Exit status: 0 when every cell succeeded, 1 when any row failed, 2 on bad
// arguments or configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drltr/experiment.h"

namespace {

using drltr::RunConfig;

void AddRunOptions(CLI::App& app, RunConfig& c, std::string& setting, bool& no_timing,
                   bool& no_scaling) {
  auto& s = c.dataset.synthetic;
  app.add_option("--dataset", c.dataset.letor_path,
                 "LETOR/SVMlight file (optionally gzipped); empty uses the synthetic generator");
  app.add_option("--synthetic-train", s.n_train, "synthetic training queries");
  app.add_option("--synthetic-validation", s.n_validation, "synthetic validation queries");
  app.add_option("--synthetic-test", s.n_test, "synthetic test queries");
  app.add_option("--items-per-query", s.items_per_query, "synthetic items per query");
  app.add_option("--feature-dim", s.feature_dim, "synthetic feature dimension");
  app.add_option("--grade-separation", s.grade_separation, "synthetic cluster separation");
  app.add_option("--data-seed", s.seed, "synthetic dataset seed");
  app.add_flag("--no-scale-features", no_scaling, "skip min-max feature scaling");

  app.add_option("--setting", setting, "top5_known, top5_estimated or full_known")
      ->check(CLI::IsMember({"top5_known", "top5_estimated", "full_known"}));
  app.add_option("--n", c.n_values, "log sizes N")->expected(1, -1);
  app.add_option("--estimators", c.estimators, "naive ips dm dm_prev dr full_info logging")
      ->expected(1, -1)
      ->check(CLI::IsMember(drltr::KnownEstimators()));
  app.add_option("--repeats", c.repeats, "independent repeats per cell");
  app.add_option("--seed", c.seed, "base seed");
  app.add_option("--tau-multiplier", c.tau_multiplier, "scales the clipping schedule");
  app.add_option("--tau", c.tau, "fixed clipping threshold (overrides the schedule)");
  app.add_option("--z", c.z, "bias interpolation toward rank-averaged parameters");
  app.add_option("--output-dir", c.output_dir, "result directory (DRLTR_OUTPUT_DIR overrides)");
  app.add_option("--threads", c.threads, "worker threads");
  app.add_flag("--no-timing", no_timing, "write wall_time_s = 0 for byte-stable output");
  app.add_option("--eval-samples", c.eval_samples, "Monte Carlo rankings per test query");

  app.add_option("--logging-fraction", c.logging.fraction, "training share for the logging model");
  app.add_option("--logging-epochs", c.logging.epochs, "logging model epochs");
  app.add_option("--logging-lr", c.logging.learning_rate, "logging model learning rate");
  app.add_option("--logging-score-scale", c.logging.score_scale, "logging PL inverse temperature");

  app.add_option("--reg-lr", c.regression.learning_rate, "regression learning rate");
  app.add_option("--reg-epochs", c.regression.epochs, "regression epochs");
  app.add_option("--reg-batch", c.regression.batch_size, "regression queries per step");
  app.add_option("--reg-momentum", c.regression.momentum, "regression momentum");
  app.add_option("--clamp-eps", c.regression.clamp_eps, "relevance clamp epsilon");

  app.add_option("--ltr-lr", c.ltr.learning_rate, "policy learning rate");
  app.add_option("--ltr-steps", c.ltr.max_steps, "maximum policy steps");
  app.add_option("--ltr-queries-per-step", c.ltr.queries_per_step, "queries per policy step");
  app.add_option("--ltr-samples", c.ltr.n_samples, "sampled rankings per query and step");
  app.add_option("--ltr-eval-interval", c.ltr.eval_interval, "steps between validation checks");
  app.add_option("--ltr-patience", c.ltr.patience, "checks without improvement before stopping");
  app.add_option("--ltr-eval-samples", c.ltr.eval_samples, "rankings for validation marginals");

  app.add_option("--em-iterations", c.em.iterations, "EM iterations");
  app.add_option("--em-inner-epochs", c.em.inner_epochs, "relevance refit epochs per EM step");
  app.add_option("--em-lr", c.em.learning_rate, "relevance refit learning rate");
}

int Finish(const std::vector<drltr::ResultRow>& rows, const RunConfig& c, const std::string& stem) {
  const std::string dir = drltr::ResolveOutputDir(c.output_dir);
  drltr::WriteResults(rows, dir, stem);
  int failed = 0;
  for (const auto& r : rows) failed += r.ok() ? 0 : 1;
  std::cout << "wrote " << rows.size() << " rows to " << dir << "/" << stem << ".csv\n";
  if (failed > 0) {
    std::cerr << failed << " of " << rows.size() << " rows failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual learning to rank from simulated clicks"};
  app.set_config("--config", "", "TOML-style key = value file; flags override it");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  RunConfig config;
  std::string setting = drltr::SettingName(config.setting);
  bool no_timing = false;
  bool no_scaling = false;
  AddRunOptions(app, config, setting, no_timing, no_scaling);

  auto* run = app.add_subcommand("run", "train and evaluate every (estimator, N, repeat) cell");
  run->fallthrough();
  std::string stem;
  run->add_option("--stem", stem, "output file stem (default run)");

  auto* clip = app.add_subcommand("sweep-clip", "repeat the run over clipping multipliers or taus");
  clip->fallthrough();
  std::vector<double> multipliers;
  std::vector<double> taus;
  auto* mult_opt = clip->add_option("--multipliers", multipliers, "tau schedule multipliers");
  clip->add_option("--taus", taus, "explicit tau grid")->excludes(mult_opt);
  clip->add_option("--stem", stem, "output file stem (default sweep_clip)");

  auto* bias = app.add_subcommand("sweep-bias", "repeat the run over bias interpolation z");
  bias->fallthrough();
  std::vector<double> zs = {0.0, 0.25, 0.5, 0.75, 1.0};
  bias->add_option("--z-grid", zs, "values of z in [0, 1]");
  bias->add_option("--stem", stem, "output file stem (default sweep_bias)");

  auto* plot = app.add_subcommand("plot-data", "aggregate a results CSV into a tidy plotting table");
  std::string input;
  std::string kind = "learning_curve";
  std::string output;
  plot->add_option("--input", input, "results CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "learning_curve, clip_sweep or bias_sweep")
      ->check(CLI::IsMember({"learning_curve", "clip_sweep", "bias_sweep"}));
  plot->add_option("--output", output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (plot->parsed()) {
      std::ifstream in(input);
      std::stringstream text;
      text << in.rdbuf();
      const std::string table = drltr::PlotData(drltr::ParseResultCsv(text.str()), kind);
      if (output.empty()) {
        std::cout << table;
      } else {
        std::ofstream out(output);
        if (!out) throw std::runtime_error("cannot write " + output);
        out << table;
      }
      return 0;
    }

    config.setting = drltr::ParseSetting(setting);
    config.timing = !no_timing;
    config.dataset.scale_features = !no_scaling;
    config.Validate();

    if (run->parsed()) {
      std::vector<drltr::BiasEstimate> em;
      const auto rows = drltr::RunExperiment(config, &em);
      if (stem.empty()) stem = "run";
      if (!em.empty()) {
        const std::string dir = drltr::ResolveOutputDir(config.output_dir);
        std::filesystem::create_directories(dir);
        std::ofstream(std::filesystem::path(dir) / (stem + "_bias.json"))
            << drltr::BiasEstimatesJson(em) << '\n';
      }
      return Finish(rows, config, stem);
    }
    if (clip->parsed()) {
      if (multipliers.empty() && taus.empty()) multipliers = {0.001, 1.0, 1000.0};
      const auto rows = taus.empty() ? drltr::SweepClipping(config, multipliers)
                                     : drltr::SweepTau(config, taus);
      return Finish(rows, config, stem.empty() ? "sweep_clip" : stem);
    }
    return Finish(drltr::SweepBiasMisspecification(config, zs), config,
                  stem.empty() ? "sweep_bias" : stem);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
