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
// Expectation-maximization estimates of the per-rank click parameters
// alpha_k, beta_k from a click log, alternating with a relevance model.
//
// Each impression of item d at rank k carries a latent R ~ Bernoulli(R_hat_d)
// and clicks with probability alpha_k + beta_k if R = 1, beta_k otherwise.

#ifndef DRLTR_BIAS_EM_H_
#define DRLTR_BIAS_EM_H_

#include <map>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "drltr/click_log.h"
#include "drltr/click_model.h"
#include "drltr/dataset.h"
#include "drltr/mlp.h"

namespace drltr {

// Clips negative entries to 0, then rescales a pair with alpha + beta > 1 by
// 1 / (alpha + beta), so (1.2, 0.3) becomes (0.8, 0.2).
BiasParams ProjectBiasParams(const std::vector<double>& alpha, const std::vector<double>& beta);

struct EmConfig {
  int iterations = 25;
  // Relevance-model epochs per M-step; 0 keeps R_hat fixed.
  int inner_epochs = 30;
  int cutoff = 5;
  double init_alpha = 0.3;
  double init_beta = 0.3;
  double learning_rate = 0.01;
  double clamp_eps = 1e-6;
  uint64_t seed = 0;
  // Per-rank starting parameters; overrides init_alpha/init_beta when set.
  std::optional<BiasParams> initial_bias;
  // Starting R_hat per query id; when absent the relevance model's initial
  // predictions are used.
  std::optional<std::map<int, Eigen::VectorXd>> initial_relevance;

  void Validate() const;
};

struct EmResult {
  BiasParams bias;
  std::map<int, Eigen::VectorXd> relevance;  // final R_hat for logged queries
  Mlp model;
  // Observed-data log-likelihood before the first and after every iteration.
  std::vector<double> log_likelihood;
};

// Log-likelihood of the clicks in `stats` under (bias, relevance).
double ClickLogLikelihood(const std::map<int, QueryClickStats>& stats, const BiasParams& bias,
                          const std::map<int, Eigen::VectorXd>& relevance);

// Throws std::invalid_argument for an empty log. Ranks without impressions
// keep their previous parameters.
EmResult EmEstimateBias(const std::map<int, QueryClickStats>& stats, const Dataset& dataset,
                        const EmConfig& config);

}  // namespace drltr

#endif  // DRLTR_BIAS_EM_H_
