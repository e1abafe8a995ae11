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
// End-to-end experiment harness: simulate a click log from a logging policy,
// optionally estimate the click parameters with EM, fit the relevance
// regression, train one policy per estimator and score it on the test
// partition with the true click model.
//
// Results CSV columns (header row first, one row per estimator, N, repeat):
//   setting,dataset,estimator,N,seed,tau_multiplier,tau,z,ecp,ndcg_at_5,wall_time_s,status
// `tau_multiplier` is empty when an explicit tau was given; `status` is "ok"
// or "failed: <reason>" (failed rows carry nan metrics).

#ifndef DRLTR_EXPERIMENT_H_
#define DRLTR_EXPERIMENT_H_

#include <optional>
#include <string>
#include <vector>

#include "drltr/bias_em.h"
#include "drltr/dataset.h"
#include "drltr/ltr_training.h"
#include "drltr/policy.h"
#include "drltr/regression.h"

namespace drltr {

enum class Setting { kTop5Known, kTop5Estimated, kFullKnown };

std::string SettingName(Setting s);
Setting ParseSetting(const std::string& name);

// Estimators understood by the harness.
inline const std::vector<std::string>& KnownEstimators() {
  static const std::vector<std::string> kNames = {"naive", "ips",       "dm",     "dm_prev",
                                                  "dr",    "full_info", "logging"};
  return kNames;
}

struct DatasetSpec {
  std::string letor_path;  // empty selects the synthetic generator
  SyntheticOptions synthetic;
  bool scale_features = true;  // min-max, fitted on the training partition

  std::string Name() const;
};

struct RunConfig {
  DatasetSpec dataset;
  Setting setting = Setting::kTop5Known;
  std::vector<long> n_values = {1000, 10000, 100000, 1000000};
  std::vector<std::string> estimators = {"naive", "ips", "dm", "dr", "full_info", "logging"};
  int repeats = 5;
  uint64_t seed = 0;
  double tau_multiplier = 1.0;
  std::optional<double> tau;  // overrides the schedule when set
  double z = 1.0;             // bias misspecification; 1 keeps the base values
  std::string output_dir = "results";
  int threads = 1;
  bool timing = true;  // false writes wall_time_s = 0 for byte-stable output
  int eval_samples = 1000;  // Monte Carlo rankings per test query (> 8 items)

  LoggingPolicyConfig logging;
  RegressionConfig regression;
  LtrConfig ltr;
  EmConfig em;

  RunConfig();
  // Throws std::invalid_argument describing the first problem found.
  void Validate() const;
};

struct ResultRow {
  std::string setting;
  std::string dataset;
  std::string estimator;
  long n = 0;
  uint64_t seed = 0;
  std::optional<double> tau_multiplier;
  double tau = 0.0;
  double z = 1.0;
  double ecp = 0.0;
  double ndcg_at_5 = 0.0;
  double wall_time_s = 0.0;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

std::string ResultCsvHeader();
std::string FormatResultCsv(const std::vector<ResultRow>& rows);
// Throws ParseError with the offending line number.
std::vector<ResultRow> ParseResultCsv(const std::string& text);

// Mean and standard deviation of ecp and ndcg_at_5 per
// (setting, dataset, estimator, N, tau_multiplier, tau, z) over ok rows.
std::string SummaryJson(const std::vector<ResultRow>& rows);

// Click parameters found by EM for one (N, repeat) log.
struct BiasEstimate {
  long n = 0;
  uint64_t seed = 0;
  BiasParams bias;
};

// Runs every (estimator, N, repeat) cell. Stage failures become rows with a
// failure status; configuration errors throw. Rows come back sorted. In the
// estimated-bias setting the EM output of each log is appended to
// `estimated_bias` when given.
std::vector<ResultRow> RunExperiment(const RunConfig& config,
                                     std::vector<BiasEstimate>* estimated_bias = nullptr);

// [{"N": ..., "seed": ..., "alpha": [...], "beta": [...]}, ...]
std::string BiasEstimatesJson(const std::vector<BiasEstimate>& estimates);

std::vector<ResultRow> SweepClipping(const RunConfig& config,
                                     const std::vector<double>& multipliers);
std::vector<ResultRow> SweepTau(const RunConfig& config, const std::vector<double>& taus);
std::vector<ResultRow> SweepBiasMisspecification(const RunConfig& config,
                                                 const std::vector<double>& zs);

// Tidy table for plotting: one row per (setting, estimator, x) with mean, sd,
// count and a normal-approximation 90% interval, where x is N, the clipping
// multiplier (or tau) or z depending on `kind` (learning_curve, clip_sweep,
// bias_sweep).
std::string PlotData(const std::vector<ResultRow>& rows, const std::string& kind);

// Output directory after applying the DRLTR_OUTPUT_DIR override.
std::string ResolveOutputDir(const std::string& configured);

// Writes <dir>/<stem>.csv and <dir>/<stem>_summary.json.
void WriteResults(const std::vector<ResultRow>& rows, const std::string& dir,
                  const std::string& stem);

}  // namespace drltr

#endif  // DRLTR_EXPERIMENT_H_
