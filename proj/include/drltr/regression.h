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
// Relevance regression: an MLP whose squashed output R_hat is fitted to
// clicks by minimizing a cross-entropy loss estimate with SGD.

#ifndef DRLTR_REGRESSION_H_
#define DRLTR_REGRESSION_H_

#include <map>
#include <vector>

#include <Eigen/Core>

#include "drltr/click_log.h"
#include "drltr/click_model.h"
#include "drltr/dataset.h"
#include "drltr/mlp.h"

namespace drltr {

enum class CeLossKind { kNew, kPrev };

struct RegressionConfig {
  double learning_rate = 0.01;
  int epochs = 40;
  int batch_size = 8;  // queries per step
  double momentum = 0.9;
  double clamp_eps = 1e-6;
  CeLossKind loss = CeLossKind::kNew;
  uint64_t seed = 0;

  // Throws std::invalid_argument on non-positive sizes or rates, or a clamp
  // epsilon outside (0, 0.5).
  void Validate() const;
};

// One training query: its items, click statistics and clipped propensities.
struct RegressionQuery {
  const Query* query = nullptr;
  const QueryClickStats* stats = nullptr;
  Eigen::VectorXd rho_hat;
};

// eps + (1 - 2 eps) sigmoid(score) per item.
Eigen::VectorXd PredictRelevance(const Mlp& model, const Query& query, double clamp_eps);

// Mean over queries of the chosen loss estimate.
double RegressionLoss(const Mlp& model, const std::vector<RegressionQuery>& queries,
                      const BiasParams& bias_hat, const RegressionConfig& config);
// Gradient of RegressionLoss with respect to the model parameters.
Eigen::VectorXd RegressionLossGrad(const Mlp& model, const std::vector<RegressionQuery>& queries,
                                   const BiasParams& bias_hat, const RegressionConfig& config);

struct RegressionResult {
  Mlp model;
  double clamp_eps = 1e-6;
  std::vector<double> loss_trace;  // full training loss after each epoch

  Eigen::VectorXd Predict(const Query& query) const {
    return PredictRelevance(model, query, clamp_eps);
  }
  // R_hat for every query of every partition, keyed by query id.
  std::map<int, Eigen::VectorXd> PredictAll(const Dataset& dataset) const;
};

// Throws DivergenceError when the loss or parameters become non-finite, and
// std::invalid_argument when there are no queries.
RegressionResult TrainRegression(const std::vector<RegressionQuery>& queries,
                                 const BiasParams& bias_hat, int feature_dim,
                                 const RegressionConfig& config);

// Same, continuing from an existing model.
RegressionResult TrainRegression(const std::vector<RegressionQuery>& queries,
                                 const BiasParams& bias_hat, Mlp initial,
                                 const RegressionConfig& config);

}  // namespace drltr

#endif  // DRLTR_REGRESSION_H_
