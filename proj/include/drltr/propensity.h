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
// Logging-policy marginals, clipped propensities rho_hat and expected
// position weights omega.

#ifndef DRLTR_PROPENSITY_H_
#define DRLTR_PROPENSITY_H_

#include <Eigen/Core>

#include "drltr/click_log.h"
#include "drltr/click_model.h"
#include "drltr/policy.h"

namespace drltr {

// n(d, k) / n_q for one query. Items never displayed get a zero row.
// Throws std::invalid_argument if the query has no impressions.
Eigen::MatrixXd EstimateLoggingMarginals(const QueryClickStats& stats);

// rho_hat_d = max(sum_k pi0(k|d) alpha_k, tau). Throws DomainError unless
// 0 < tau <= 1.
Eigen::VectorXd RhoHat(const Eigen::MatrixXd& marginals, const BiasParams& alpha_hat,
                       double tau);

// Unclipped sum_k pi0(k|d) alpha_k.
Eigen::VectorXd Rho(const Eigen::MatrixXd& marginals, const BiasParams& params);

// omega_d = sum_k pi(k|d) (alpha_k + beta_k).
Eigen::VectorXd Omega(const Eigen::MatrixXd& marginals, const BiasParams& params);

enum class ClipSetting { kTopK, kFull };

// min(1, 10/sqrt(N)) for top-k, min(1, 100/sqrt(N)) for full ranking.
double ClipSchedule(long n, ClipSetting setting);

struct PropensityTable {
  Eigen::VectorXd rho_hat;
  double tau = 1.0;
  BiasParams alpha_hat;  // beta is carried along for the estimators
};

// From log counts.
PropensityTable BuildPropensityTable(const QueryClickStats& stats, const BiasParams& bias_hat,
                                     double tau);
// From known logging-policy marginals instead of counts.
PropensityTable BuildPropensityTable(const RankMarginals& logging, const BiasParams& bias_hat,
                                     double tau);

}  // namespace drltr

#endif  // DRLTR_PROPENSITY_H_
