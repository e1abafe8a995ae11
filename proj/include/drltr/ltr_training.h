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
// Plackett-Luce policy optimization against an estimated metric
// sum_d omega_hat_d mu_hat_d with sampled score-function gradients and
// early stopping on validation-click estimates.

#ifndef DRLTR_LTR_TRAINING_H_
#define DRLTR_LTR_TRAINING_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "drltr/click_model.h"
#include "drltr/dataset.h"
#include "drltr/mlp.h"
#include "drltr/policy.h"
#include "drltr/random.h"

namespace drltr {

// Expected reward of a ranking: sum_k (alpha_k + beta_k) mu_hat[y_k].
double RankingReward(const std::vector<int>& ranking, const Eigen::VectorXd& mu_hat,
                     const BiasParams& bias);

struct PolicyGradientResult {
  Eigen::VectorXd grad;                    // d/d scores of E[reward]
  std::vector<std::vector<int>> rankings;  // the sampled rankings
  double mean_reward = 0.0;
};

// Score-function estimate from `n_samples` PL rankings of length `length`.
// Each sample's reward is centred by the mean reward of the other samples
// (leave-one-out), which keeps the estimate unbiased; with one sample no
// baseline is used. Throws std::invalid_argument if n_samples < 1.
PolicyGradientResult PolicyGradient(const Eigen::VectorXd& scores, const Eigen::VectorXd& mu_hat,
                                    const BiasParams& bias, int length, int n_samples, Rng& rng);

// Exact E_{y ~ PL(scores)}[reward] by enumeration (at most 8 items).
double ExactExpectedReward(const Eigen::VectorXd& scores, const Eigen::VectorXd& mu_hat,
                           const BiasParams& bias, int length);

// Per-query training target: the objective for this query is
// sum_d omega_hat_d mu_hat_d.
struct PolicyTarget {
  const Query* query = nullptr;
  Eigen::VectorXd mu_hat;
};

struct LtrConfig {
  double learning_rate = 0.01;
  int max_steps = 600;
  int queries_per_step = 16;
  int n_samples = 32;       // rankings per query per gradient step
  int eval_interval = 25;   // steps between validation evaluations
  int patience = 8;         // evaluations without improvement before stopping
  int eval_samples = 200;   // Monte Carlo rankings for validation marginals
  uint64_t seed = 0;

  void Validate() const;
};

struct TraceRow {
  int step = 0;
  double train_objective = 0.0;
  double validation_estimate = 0.0;
};

struct LtrResult {
  Mlp model;               // best checkpoint by validation estimate
  int best_step = 0;
  double best_validation = 0.0;
  std::vector<TraceRow> trace;

  std::string TraceCsv() const;
};

// mean over targets of sum_d omega_hat_d mu_hat_d for the policy `model`,
// with omega_hat from rank marginals (exact up to 8 items, Monte Carlo
// otherwise, using `rng`).
double PolicyObjective(const Mlp& model, const std::vector<PolicyTarget>& targets,
                       const BiasParams& bias, int cutoff, int mc_samples, Rng& rng);

// Adam ascent on the training objective from `initial`. Throws
// DivergenceError on non-finite scores or parameters.
LtrResult TrainPolicy(const Mlp& initial, const std::vector<PolicyTarget>& train,
                      const std::vector<PolicyTarget>& validation, const BiasParams& bias,
                      int cutoff, const LtrConfig& config);

}  // namespace drltr

#endif  // DRLTR_LTR_TRAINING_H_
